#include "hfw/hiergeo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hfw/error.hpp"
#include "hfw/io.hpp"

namespace hfw {

std::uint64_t ipow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > (~std::uint64_t(0)) / base) throw SizeError("integer power overflows 64 bits");
    r *= base;
  }
  return r;
}

HierAddress::HierAddress(int N_, int truncation) : N(N_), digits(truncation, 0) {
  require(N >= 2, "group order N must be >= 2");
  require(truncation >= 0, "truncation must be non-negative");
}

HierAddress::HierAddress(int N_, std::vector<int> d) : N(N_), digits(std::move(d)) {
  require(N >= 2, "group order N must be >= 2");
  for (int x : digits) require(x >= 0 && x < N, "address digit outside [0, N-1]");
}

HierAddress HierAddress::from_index(std::uint64_t index, int N, int truncation) {
  HierAddress a(N, truncation);
  for (int i = 0; i < truncation; ++i) {
    a.digits[i] = int(index % std::uint64_t(N));
    index /= std::uint64_t(N);
  }
  require(index == 0, "index exceeds the truncated group");
  return a;
}

std::uint64_t HierAddress::index() const {
  std::uint64_t idx = 0;
  for (int i = truncation() - 1; i >= 0; --i) idx = idx * std::uint64_t(N) + std::uint64_t(digits[i]);
  return idx;
}

static void check_same(const HierAddress& a, const HierAddress& b) {
  if (a.N != b.N || a.truncation() != b.truncation())
    throw ParameterError("addresses differ in group order or truncation");
}

HierAddress HierAddress::operator+(const HierAddress& o) const {
  check_same(*this, o);
  HierAddress r = *this;
  for (int i = 0; i < truncation(); ++i) r.digits[i] = (digits[i] + o.digits[i]) % N;
  return r;
}

HierAddress HierAddress::operator-(const HierAddress& o) const {
  check_same(*this, o);
  HierAddress r = *this;
  for (int i = 0; i < truncation(); ++i) r.digits[i] = (digits[i] - o.digits[i] + N) % N;
  return r;
}

std::string HierAddress::to_string() const {
  std::string s;
  for (int d : digits) {
    if (N <= 10) {
      s.push_back(char('0' + d));
    } else {
      if (!s.empty()) s.push_back('.');
      s += std::to_string(d);
    }
  }
  return s;
}

int hier_distance(const HierAddress& a, const HierAddress& b) {
  check_same(a, b);
  for (int i = a.truncation() - 1; i >= 0; --i)
    if (a.digits[i] != b.digits[i]) return i + 1;
  return 0;
}

int hier_distance(std::uint64_t a, std::uint64_t b, int N, int truncation) {
  int d = 0;
  for (int i = 0; i < truncation; ++i) {
    if (a % std::uint64_t(N) != b % std::uint64_t(N)) d = i + 1;
    a /= std::uint64_t(N);
    b /= std::uint64_t(N);
  }
  return d;
}

KernelSpec::KernelSpec(int N_, std::vector<double> c_, double growth_bound)
    : N(N_), c(std::move(c_)) {
  require(N >= 2, "group order N must be >= 2");
  require(!c.empty(), "migration coefficients must be non-empty");
  require(std::isfinite(c[0]) && c[0] > 0.0, "c_0 must be positive");
  const double lb = std::log(growth_bound);
  for (std::size_t k = 0; k < c.size(); ++k) {
    require(std::isfinite(c[k]) && c[k] >= 0.0, "migration coefficients must be finite and >= 0");
    if (c[k] > 0.0)
      require(std::log(c[k]) <= lb + double(k) * std::log(double(N)),
              "migration coefficient c_" + std::to_string(k) + " violates the growth bound");
  }
}

double KernelSpec::level_weight(int k) const {
  return c[k - 1] * std::pow(double(N), -(k - 1));
}

double migration_rate(const HierAddress& a, const HierAddress& b, const KernelSpec& spec) {
  check_same(a, b);
  if (a.N != spec.N || a.truncation() != spec.truncation())
    throw ParameterError("address geometry does not match the kernel");
  const int d = hier_distance(a, b);
  if (d == 0) return 0.0;
  double s = 0.0;
  for (int k = spec.truncation(); k >= d; --k)
    s += spec.c[k - 1] * std::pow(double(spec.N), -(2 * k - 1));
  return s;
}

double total_jump_rate(const KernelSpec& spec) {
  double s = 0.0;
  for (int k = spec.truncation(); k >= 1; --k) s += spec.level_weight(k);
  return s;
}

double outflow_rate(const KernelSpec& spec) {
  double s = 0.0;
  for (int k = spec.truncation(); k >= 1; --k)
    s += spec.level_weight(k) * (1.0 - std::pow(double(spec.N), -k));
  return s;
}

JumpSampler::JumpSampler(const KernelSpec& spec) : spec_(spec) {
  const int L = spec.truncation();
  cum_.resize(L);
  block_size_.resize(L + 1);
  double s = 0.0;
  for (int k = 1; k <= L; ++k) {
    s += spec.level_weight(k);
    cum_[k - 1] = s;
    block_size_[k] = ipow(std::uint64_t(spec.N), k);
  }
  block_size_[0] = 1;
}

int JumpSampler::sample_level(Stream& rng) const {
  const double u = rng.uniform() * cum_.back();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  int k = int(it - cum_.begin()) + 1;
  if (k > int(cum_.size())) k = int(cum_.size());
  // zero-weight levels have repeated cumulative values and are never selected
  return k;
}

std::uint64_t JumpSampler::sample(std::uint64_t from, Stream& rng) const {
  const int k = sample_level(rng);
  const std::uint64_t bs = block_size_[k];
  return from - from % bs + rng.below(bs);
}

std::uint64_t JumpSampler::sample_moving(std::uint64_t from, Stream& rng) const {
  for (;;) {
    const std::uint64_t to = sample(from, rng);
    if (to != from) return to;
  }
}

HierAddress sample_migration_jump(const HierAddress& a, const KernelSpec& spec, Stream& rng) {
  if (a.N != spec.N || a.truncation() != spec.truncation())
    throw ParameterError("address geometry does not match the kernel");
  double total = total_jump_rate(spec);
  double u = rng.uniform() * total;
  int k = spec.truncation();
  double acc = 0.0;
  for (int j = 1; j <= spec.truncation(); ++j) {
    acc += spec.level_weight(j);
    if (u < acc) {
      k = j;
      break;
    }
  }
  HierAddress b = a;
  for (int i = 0; i < k; ++i) b.digits[i] = int(rng.below(std::uint64_t(spec.N)));
  return b;
}

double KernelExpansion::Kjk(int N, int j, int k) {
  if (j == k) return j == 0 ? 0.0 : -1.0;
  return double(N - 1);
}

KernelExpansion KernelExpansion::build(const KernelSpec& spec) {
  KernelExpansion ex;
  ex.N = spec.N;
  ex.L = spec.truncation();
  const int L = ex.L;
  const double N = spec.N;
  std::vector<double> S(L + 2, 0.0);
  for (int j = L; j >= 1; --j) S[j] = spec.level_weight(j) + S[j + 1] / N;
  double sumS = 0.0;
  for (int j = L; j >= 1; --j) sumS += S[j];
  ex.D = (N - 1.0) / N * sumS;
  ex.r.assign(L + 1, 0.0);
  ex.h.assign(L + 1, 0.0);
  for (int j = 1; j <= L; ++j) ex.r[j] = (N - 1.0) / N * S[j] / ex.D;
  double tail = 0.0;
  for (int j = L; j >= 1; --j) {
    ex.h[j] = N / (N - 1.0) * ex.r[j] + tail;
    tail += ex.r[j];
  }
  ex.remainder_bound = std::pow(N, -L);
  return ex;
}

static double partial_sum(double t, int k, const KernelExpansion& ex) {
  double s = 0.0;
  for (int j = ex.L; j >= std::max(k, 1); --j)
    s += KernelExpansion::Kjk(ex.N, j, k) * std::exp(-ex.h[j] * t) * std::pow(double(ex.N), -j);
  return s;
}

double transition_kernel(double t, int k, const KernelExpansion& ex, double tol) {
  require(t >= 0.0, "time must be non-negative");
  require(k >= 0, "distance must be non-negative");
  if (k > ex.L || ex.remainder_bound > tol)
    throw AccuracyError("kernel truncation at level " + std::to_string(ex.L) +
                        " leaves remainder " + num(ex.remainder_bound) +
                        " above tolerance " + num(tol));
  return partial_sum(t, k, ex);
}

double finite_group_kernel(double t, int k, const KernelExpansion& ex) {
  require(t >= 0.0, "time must be non-negative");
  require(k >= 0 && k <= ex.L, "distance outside the truncated group");
  return partial_sum(t, k, ex) + ex.remainder_bound;
}

double return_probability(double t_phys, const KernelExpansion& ex) {
  return partial_sum(ex.D * t_phys, 0, ex);
}

void write_kernel_table(std::ostream& os, const KernelSpec& spec, const KernelExpansion& ex) {
  os << "level,c_k,r_k,h_k\n";
  for (int j = 1; j <= ex.L; ++j) csv_row(os, j, spec.c[j - 1], ex.r[j], ex.h[j]);
}

}  // namespace hfw
