#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hfw/diffusion.hpp"
#include "hfw/forward.hpp"
#include "hfw/pair.hpp"
#include "hfw/params.hpp"
#include "hfw/rng.hpp"

namespace hfw {

// Time budget in units of the slow relaxation time 1/|slow eigenvalue|.
struct EquilibriumBudget {
  double kappa = 0.005;    // step = kappa * relaxation time
  double burn_in = 20;     // relaxation times discarded
  double horizon = 20000;  // relaxation times averaged
  int batches = 20;
  int refine = 10;  // maximal step halvings near the boundary
};

struct EquilibriumEstimate {
  double theta = 0;
  MeanSE x, y, xx, yy, xy;
  MeanSE Fg;  // time average of g(x)
  // Time averages of the zero-mean functionals
  //   x - theta, y - theta, xy - y^2,
  //   xy - (E c theta^2 + e x^2)/(E c + e),
  //   (y^2 - theta^2) - e/(E c + e) (x^2 - theta^2).
  std::array<MeanSE, 5> identity{};
  double relaxation_time = 0;
  double dt = 0;
  long steps = 0;
  std::uint64_t clips = 0;
  bool flagged = false;  // split-half stationarity check failed
  std::string flag_reason;
};

// Long-run time averages of the effective pair with drift centre theta.
EquilibriumEstimate mv_equilibrium(const PairCoeffs& pc, const DiffusionFn& g, double theta,
                                   const EquilibriumBudget& budget, Stream& rng);

class RefinedStepper;

// Independent draws from the equilibrium: run from (start, start) for
// budget.burn_in relaxation times and return the endpoint.
class EquilibriumSampler {
 public:
  EquilibriumSampler(const PairCoeffs& pc, const DiffusionFn& g, const EquilibriumBudget& budget);
  Eigen::Vector2d sample(double theta, double start, Stream& rng) const;

 private:
  DiffusionFn g_;
  double tau_;
  double burn_in_;
  std::shared_ptr<const RefinedStepper> stepper_;
};

struct FResult {
  DiffusionFn g;           // tabulated F g
  std::vector<double> se;  // per node
  bool flagged = false;
};

// (F g)(theta) = E[g(x)] under the equilibrium at each node; endpoints are 0.
FResult evaluate_F(const DiffusionFn& g, const PairCoeffs& pc, const std::vector<double>& nodes,
                   const EquilibriumBudget& budget, std::uint64_t seed, int level = 0);

// d_0 = d, d_{n+1} = d_n / (1 + d_n A_n^n), n < levels.
std::vector<double> fw_recursion_oracle(double d, int levels, const ClusteringCoefficients& cc);

PairCoeffs level_coeffs(const ModelParams& p, const DerivedParams& d, int level);

struct OrbitLevel {
  int level = 0;
  double A_n = 0;
  DiffusionFn g;                // F^(n) g on the grid
  std::vector<double> se;       // per node, of F^(n) g
  double sup_distance = 0;      // max over nodes |A_n F^(n) g - g_FW|
  bool flagged = false;
};

struct OrbitReport {
  std::vector<double> nodes;
  std::vector<OrbitLevel> levels;  // levels[0] is g itself
  // CSV `level,A_n,sup_distance`
  void write_csv(std::ostream& os) const;
  // CSV `level,theta,scaled,scaled_se`
  void write_grid_csv(std::ostream& os) const;
};

OrbitReport iterate_F_scaled(const DiffusionFn& g, const ModelParams& p, const DerivedParams& d,
                             int levels, const EquilibriumBudget& budget, std::uint64_t seed,
                             const std::vector<double>& nodes = GridFunction::chebyshev_nodes());

struct ChainSamples {
  int k = 0;
  double start = 0;                    // vartheta_k
  std::vector<std::vector<double>> x;  // x[m][replica]: active value at level -m, m = 0..k
  std::vector<std::vector<double>> y;  // y[m][replica]: colour-m dormant value at level -m
  MeanSE mean(int m) const;
  MeanSE variance(int m) const;
  // Fraction of replicas with x at level 0 above hi / below lo.
  MeanSE fraction_above(double hi) const;
  MeanSE fraction_below(double lo) const;
};

// g_orbit[l] = F^(l) g for l = 0..k.
ChainSamples sample_interaction_chain(int k, const ModelParams& p, const DerivedParams& d,
                                      const std::vector<DiffusionFn>& g_orbit, int replicas,
                                      const EquilibriumBudget& budget, std::uint64_t seed);

// f^k(l) = A_0^l / A_0^k for l = 0..k.
std::vector<double> volatility_profile(int k, const ClusteringCoefficients& cc);
enum class ProfileClass { fast, diffusive, slow };
const char* profile_name(ProfileClass c);
// First level where the profile reaches eps, relative to k: near 1 fast, near 0 slow.
ProfileClass classify_profile(const std::vector<double>& f, double eps = 0.5);

}  // namespace hfw
