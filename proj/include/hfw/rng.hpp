#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace hfw {

// Philox4x32-10 block function (Salmon, Moraes, Dror, Shaw, SC'11).
struct Philox4x32 {
  using ctr_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t M0 = 0xD2511F53u;
  static constexpr std::uint32_t M1 = 0xCD9E8D57u;
  static constexpr std::uint32_t W0 = 0x9E3779B9u;
  static constexpr std::uint32_t W1 = 0xBB67AE85u;

  static constexpr ctr_type apply(ctr_type c, key_type k) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        k[0] += W0;
        k[1] += W1;
      }
      const std::uint64_t p0 = std::uint64_t(M0) * c[0];
      const std::uint64_t p1 = std::uint64_t(M1) * c[2];
      c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
           std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
    }
    return c;
  }
};

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Key for one (run, task, replica, node) cell. Nothing is shared between cells.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::string_view task,
                                   std::uint64_t replica = 0,
                                   std::uint64_t node = 0) {
  std::uint64_t h = splitmix64(seed ^ fnv1a64(task));
  h = splitmix64(h ^ splitmix64(replica + 0x632BE59BD9B4E019ull));
  h = splitmix64(h ^ splitmix64(node + 0x8CB92BA72F3D8DD7ull));
  return h;
}

// Counter-based stream: key fixed, counter = (block index, substream id).
class Stream {
 public:
  explicit Stream(std::uint64_t key, std::uint64_t substream = 0)
      : key_{std::uint32_t(key), std::uint32_t(key >> 32)},
        sub_(substream) {}

  std::uint32_t next_u32() {
    if (idx_ == 4) refill();
    return buf_[idx_++];
  }
  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }
  // Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() {
    return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }
  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t lim = (~std::uint64_t(0) - n + 1) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      const unsigned __int128 m = (unsigned __int128)x * n;
      if (std::uint64_t(m) >= lim) return std::uint64_t(m >> 64);
    }
  }
  double exponential(double rate) { return -std::log(uniform()) / rate; }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }
  double gamma(double shape);
  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill() {
    buf_ = Philox4x32::apply(
        {std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(sub_),
         std::uint32_t(sub_ >> 32)},
        key_);
    ++block_;
    idx_ = 0;
  }

  Philox4x32::key_type key_;
  std::uint64_t sub_;
  std::uint64_t block_ = 0;
  Philox4x32::ctr_type buf_{};
  int idx_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Marsaglia-Tsang; shape < 1 via the u^{1/a} boost.
inline double Stream::gamma(double shape) {
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline Stream make_stream(std::uint64_t seed, std::string_view task,
                          std::uint64_t replica = 0, std::uint64_t node = 0) {
  return Stream(derive_key(seed, task, replica, node));
}

}  // namespace hfw
