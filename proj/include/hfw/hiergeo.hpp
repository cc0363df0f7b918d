#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hfw/rng.hpp"

namespace hfw {

// Point of the hierarchical group truncated to `digits.size()` levels.
// Digit i is the coordinate at level i; the group law is digitwise mod N.
struct HierAddress {
  int N = 2;
  std::vector<int> digits;

  HierAddress() = default;
  HierAddress(int N, int truncation);
  HierAddress(int N, std::vector<int> digits);

  static HierAddress from_index(std::uint64_t index, int N, int truncation);
  std::uint64_t index() const;
  int truncation() const { return int(digits.size()); }

  HierAddress operator+(const HierAddress& o) const;
  HierAddress operator-(const HierAddress& o) const;
  bool operator==(const HierAddress& o) const = default;

  // Base-N digit string, least-significant digit first ("01" = digit0 0, digit1 1).
  std::string to_string() const;
};

std::uint64_t ipow(std::uint64_t base, int exp);

// min{k : digits of a and b agree on every level >= k}.
int hier_distance(const HierAddress& a, const HierAddress& b);
// Same on packed indices.
int hier_distance(std::uint64_t a, std::uint64_t b, int N, int truncation);

// Migration coefficients c_0..c_{L-1}; jumps reach blocks B_1..B_L.
struct KernelSpec {
  int N = 2;
  std::vector<double> c;

  KernelSpec() = default;
  // growth_bound: c_k <= growth_bound * N^k is required on the prefix.
  KernelSpec(int N, std::vector<double> c, double growth_bound = 1e6);

  int truncation() const { return int(c.size()); }
  // Weight c_{k-1}/N^{k-1} of choosing block level k (k = 1..L).
  double level_weight(int k) const;
};

double migration_rate(const HierAddress& a, const HierAddress& b,
                      const KernelSpec& spec);
// Rate of the lazily sampled jump clock (self-selection included).
double total_jump_rate(const KernelSpec& spec);
// Rate of actually leaving the colony: sum over b != a of migration_rate.
double outflow_rate(const KernelSpec& spec);

// Cumulative level weights for repeated sampling.
class JumpSampler {
 public:
  explicit JumpSampler(const KernelSpec& spec);
  int sample_level(Stream& rng) const;
  // Destination index; may equal `from` (self-selection).
  std::uint64_t sample(std::uint64_t from, Stream& rng) const;
  // Destination index conditioned to differ from `from`.
  std::uint64_t sample_moving(std::uint64_t from, Stream& rng) const;
  const KernelSpec& spec() const { return spec_; }

 private:
  KernelSpec spec_;
  std::vector<double> cum_;
  std::vector<std::uint64_t> block_size_;
};

HierAddress sample_migration_jump(const HierAddress& a, const KernelSpec& spec,
                                  Stream& rng);

// Eigen-expansion of the time-t kernel in D-normalised time (sum_j r_j = 1).
struct KernelExpansion {
  int N = 2;
  int L = 0;
  double D = 0.0;
  std::vector<double> r;  // r[j], j = 1..L (r[0] unused)
  std::vector<double> h;  // h[j], j = 1..L
  double remainder_bound = 0.0;  // N^{-L}: mass carried by levels above L

  static KernelExpansion build(const KernelSpec& spec);
  static double Kjk(int N, int j, int k);
};

// a_t(0,eta) at distance k, partial sum over j <= L of the infinite-group
// expansion. Throws AccuracyError if N^{-L} > tol.
double transition_kernel(double t, int k, const KernelExpansion& ex,
                         double tol = 1e-10);
// Exact kernel of the walk on the truncated group (adds the uniform mode).
double finite_group_kernel(double t, int k, const KernelExpansion& ex);
// Return-probability a_t(0,0) with t in physical time of the original kernel.
double return_probability(double t_phys, const KernelExpansion& ex);

// CSV: level,c_k,r_k,h_k
void write_kernel_table(std::ostream& os, const KernelSpec& spec,
                        const KernelExpansion& ex);

}  // namespace hfw
