#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hfw {

// Number of worker threads; 0 means hardware concurrency.
inline unsigned& worker_threads() {
  static unsigned n = 0;
  return n;
}

// Runs fn(i) for i in [0,n). Each index must write only its own output slot,
// so results do not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned t = worker_threads();
  if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
  t = unsigned(std::min<std::size_t>(t, n));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += t) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace hfw
