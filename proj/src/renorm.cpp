#include "hfw/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hfw/error.hpp"
#include "hfw/io.hpp"
#include "hfw/parallel.hpp"

namespace hfw {

namespace {

MeanSE batch_stats(const std::vector<double>& b) {
  const double n = double(b.size());
  double s = 0, ss = 0;
  for (double v : b) s += v;
  const double m = s / n;
  for (double v : b) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1) / n)};
}

EquilibriumEstimate degenerate(double theta) {
  EquilibriumEstimate e;
  e.theta = theta;
  e.x = e.y = {theta, 0};
  e.xx = e.yy = e.xy = {theta * theta, 0};
  e.Fg = {0, 0};
  return e;
}

}  // namespace

// Exact pair propagation with dyadic step refinement: the step is halved
// until the one-step noise sd of each component is at most eta times its
// distance to the boundary, so that clipping stays rare near 0 and 1.
class RefinedStepper {
 public:
  static constexpr double kEta = 0.25;

  RefinedStepper(const PairCoeffs& pc, double h, int depth) {
    for (int j = 0; j <= depth; ++j) ladder_.emplace_back(pc, std::ldexp(h, -j));
  }

  // Advances z in place and returns the step used. With `m`, also returns the
  // step integrals of the first and second moments about theta.
  double advance(Eigen::Vector2d& z, double theta, const DiffusionFn& g, Stream& rng,
                 std::uint64_t* clips, PairPropagator::StepMoments* m = nullptr) const {
    const double q = g(z(0));
    const double dx = std::min(z(0), 1.0 - z(0)), dy = std::min(z(1), 1.0 - z(1));
    std::size_t j = 0;
    if (q > 0)
      while (j + 1 < ladder_.size() &&
             (q * ladder_[j].noise_cov()(0, 0) > kEta * kEta * dx * dx ||
              q * ladder_[j].noise_cov()(1, 1) > kEta * kEta * dy * dy))
        ++j;
    const PairPropagator& P = ladder_[j];
    if (m) *m = P.integrated(z, theta, q);
    z = P.relax(z, theta) + P.noise(q, rng);
    if (z(0) < 0 || z(0) > 1 || z(1) < 0 || z(1) > 1) ++*clips;
    z(0) = std::clamp(z(0), 0.0, 1.0);
    z(1) = std::clamp(z(1), 0.0, 1.0);
    return P.h();
  }

 private:
  std::vector<PairPropagator> ladder_;
};

EquilibriumEstimate mv_equilibrium(const PairCoeffs& pc, const DiffusionFn& g, double theta,
                                   const EquilibriumBudget& budget, Stream& rng) {
  require(theta >= 0 && theta <= 1, "theta must lie in [0,1]");
  require(budget.kappa > 0 && budget.horizon > 0 && budget.burn_in >= 0 && budget.batches >= 4,
          "invalid equilibrium budget");
  if (theta == 0 || theta == 1 || g.is_zero()) {
    EquilibriumEstimate e = degenerate(theta);
    if (!g.is_zero()) e.Fg = {g(theta), 0};
    return e;
  }
  const PairPropagator probe(pc, 1.0);
  const double tau = 1.0 / probe.slow_rate();
  const double dt = budget.kappa * tau;
  const RefinedStepper stepper(pc, dt, budget.refine);
  const int B = budget.batches;
  const double span = budget.horizon * tau / B;

  EquilibriumEstimate est;
  est.theta = theta;
  est.relaxation_time = tau;
  est.dt = dt;

  const double Ec = pc.E * pc.c;
  const double r = pc.e / (Ec + pc.e);
  const double th2 = theta * theta;
  constexpr int F = 11;
  std::vector<std::array<double, F>> batch(static_cast<std::size_t>(B));
  Eigen::Vector2d z(theta, theta);
  for (double t = 0; t < budget.burn_in * tau; ++est.steps)
    t += stepper.advance(z, theta, g, rng, &est.clips);
  // Moments are integrated exactly over each step of the frozen-noise
  // process, so the drift identities telescope whatever steps are taken;
  // g(x) is weighted by the step that follows it.
  PairPropagator::StepMoments sm;
  for (int b = 0; b < B; ++b) {
    std::array<double, F> acc{};
    double t = 0;
    while (t < span) {
      const double gx = g(z(0));
      const double h = stepper.advance(z, theta, g, rng, &est.clips, &sm);
      const double x = theta * h + sm.first(0), y = theta * h + sm.first(1);
      const double xx = th2 * h + 2 * theta * sm.first(0) + sm.second(0, 0);
      const double yy = th2 * h + 2 * theta * sm.first(1) + sm.second(1, 1);
      const double xy = th2 * h + theta * (sm.first(0) + sm.first(1)) + sm.second(0, 1);
      const std::array<double, F> f{x,
                                    y,
                                    xx,
                                    yy,
                                    xy,
                                    gx * h,
                                    x - theta * h,
                                    y - theta * h,
                                    xy - yy,
                                    xy - (Ec * th2 * h + pc.e * xx) / (Ec + pc.e),
                                    (yy - th2 * h) - r * (xx - th2 * h)};
      for (int k = 0; k < F; ++k) acc[std::size_t(k)] += f[std::size_t(k)];
      t += h;
      ++est.steps;
    }
    for (double& v : acc) v /= t;
    batch[std::size_t(b)] = acc;
  }
  auto col = [&](int f, int lo, int hi) {
    std::vector<double> v;
    for (int b = lo; b < hi; ++b) v.push_back(batch[std::size_t(b)][std::size_t(f)]);
    return batch_stats(v);
  };
  est.x = col(0, 0, B);
  est.y = col(1, 0, B);
  est.xx = col(2, 0, B);
  est.yy = col(3, 0, B);
  est.xy = col(4, 0, B);
  est.Fg = col(5, 0, B);
  for (int i = 0; i < 5; ++i) est.identity[std::size_t(i)] = col(6 + i, 0, B);
  for (int f : {0, 2, 5}) {
    const MeanSE a = col(f, 0, B / 2), b = col(f, B / 2, B);
    if (std::abs(a.mean - b.mean) > 4.0 * std::hypot(a.se, b.se) + 1e-15) {
      est.flagged = true;
      est.flag_reason = "split-half means differ by more than 4 SE";
    }
  }
  return est;
}

EquilibriumSampler::EquilibriumSampler(const PairCoeffs& pc, const DiffusionFn& g,
                                       const EquilibriumBudget& budget)
    : g_(g),
      tau_(1.0 / PairPropagator(pc, 1.0).slow_rate()),
      burn_in_(budget.burn_in),
      stepper_(std::make_shared<RefinedStepper>(pc, budget.kappa * tau_, budget.refine)) {}

Eigen::Vector2d EquilibriumSampler::sample(double theta, double start, Stream& rng) const {
  Eigen::Vector2d z(start, start);
  if (theta == 0 || theta == 1) return Eigen::Vector2d(theta, theta);
  std::uint64_t clips = 0;
  for (double t = 0; t < burn_in_ * tau_;) t += stepper_->advance(z, theta, g_, rng, &clips);
  return z;
}

FResult evaluate_F(const DiffusionFn& g, const PairCoeffs& pc, const std::vector<double>& nodes,
                   const EquilibriumBudget& budget, std::uint64_t seed, int level) {
  require(nodes.size() >= 2 && nodes.front() == 0.0 && nodes.back() == 1.0,
          "theta grid must include 0 and 1");
  std::vector<double> v(nodes.size(), 0.0), se(nodes.size(), 0.0);
  std::vector<char> flag(nodes.size(), 0);
  parallel_for(nodes.size(), [&](std::size_t i) {
    if (i == 0 || i + 1 == nodes.size()) return;
    Stream rng = make_stream(seed, "evaluate-F", std::uint64_t(level), i);
    const EquilibriumEstimate e = mv_equilibrium(pc, g, nodes[i], budget, rng);
    v[i] = std::max(0.0, e.Fg.mean);
    se[i] = e.Fg.se;
    flag[i] = e.flagged;
  });
  GridFunction grid(nodes, v);
  FResult r;
  r.g = DiffusionFn::tabulated(grid, std::max(g.lipschitz_bound(), grid.max_slope()));
  r.se = std::move(se);
  r.flagged = std::any_of(flag.begin(), flag.end(), [](char c) { return c != 0; });
  return r;
}

std::vector<double> fw_recursion_oracle(double d, int levels, const ClusteringCoefficients& cc) {
  require(d >= 0, "d must be >= 0");
  require(levels >= 0 && levels <= cc.n_max(), "recursion needs A_n^n for n < levels");
  std::vector<double> out{d};
  for (int n = 0; n < levels; ++n) {
    const double dn = out.back();
    out.push_back(dn / (1.0 + dn * cc.term[std::size_t(n)]));
  }
  return out;
}

PairCoeffs level_coeffs(const ModelParams& p, const DerivedParams& d, int level) {
  require(level >= 0 && level <= p.levels, "level outside the stored coefficients");
  return {d.E[std::size_t(level)], p.c[std::size_t(level)], p.K[std::size_t(level)],
          p.e[std::size_t(level)]};
}

OrbitReport iterate_F_scaled(const DiffusionFn& g, const ModelParams& p, const DerivedParams& d,
                             int levels, const EquilibriumBudget& budget, std::uint64_t seed,
                             const std::vector<double>& nodes) {
  require(levels >= 1 && levels <= p.levels + 1, "orbit levels exceed the stored coefficients");
  const ClusteringCoefficients cc = compute_A(p, d, levels);
  const DiffusionFn fw = DiffusionFn::fisher_wright(1.0);
  OrbitReport rep;
  rep.nodes = nodes;
  OrbitLevel l0;
  l0.g = g.tabulate(nodes);
  l0.se.assign(nodes.size(), 0.0);
  rep.levels.push_back(l0);
  for (int n = 0; n < levels; ++n) {
    const FResult f = evaluate_F(rep.levels.back().g, level_coeffs(p, d, n), nodes, budget, seed, n);
    OrbitLevel L;
    L.level = n + 1;
    L.A_n = cc.A(n + 1);
    L.g = f.g;
    L.se = f.se;
    L.flagged = f.flagged;
    for (double th : nodes) L.sup_distance = std::max(L.sup_distance, std::abs(L.A_n * L.g(th) - fw(th)));
    rep.levels.push_back(std::move(L));
  }
  return rep;
}

void OrbitReport::write_csv(std::ostream& os) const {
  os << "level,A_n,sup_distance\n";
  for (const auto& l : levels) csv_row(os, l.level, l.A_n, l.sup_distance);
}

void OrbitReport::write_grid_csv(std::ostream& os) const {
  os << "level,theta,scaled,scaled_se\n";
  for (const auto& l : levels)
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double a = l.level == 0 ? 1.0 : l.A_n;
      csv_row(os, l.level, nodes[i], a * l.g(nodes[i]), a * l.se[i]);
    }
}

MeanSE ChainSamples::mean(int m) const {
  const auto& v = x[std::size_t(m)];
  double s = 0, ss = 0;
  for (double a : v) s += a;
  const double n = double(v.size()), mu = s / n;
  for (double a : v) ss += (a - mu) * (a - mu);
  return {mu, std::sqrt(ss / (n - 1) / n)};
}

MeanSE ChainSamples::variance(int m) const {
  // SE of the sample variance from the fourth central moment
  const auto& v = x[std::size_t(m)];
  const double n = double(v.size());
  double s = 0;
  for (double a : v) s += a;
  const double mu = s / n;
  double m2 = 0, m4 = 0;
  for (double a : v) {
    const double d2 = (a - mu) * (a - mu);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  return {m2 * n / (n - 1), std::sqrt(std::max(0.0, m4 - m2 * m2) / n)};
}

static MeanSE fraction(const std::vector<double>& v, auto pred) {
  double k = 0;
  for (double a : v) k += pred(a) ? 1 : 0;
  const double n = double(v.size()), f = k / n;
  return {f, std::sqrt(f * (1 - f) / n)};
}

MeanSE ChainSamples::fraction_above(double hi) const {
  return fraction(x.front(), [hi](double a) { return a > hi; });
}

MeanSE ChainSamples::fraction_below(double lo) const {
  return fraction(x.front(), [lo](double a) { return a < lo; });
}

ChainSamples sample_interaction_chain(int k, const ModelParams& p, const DerivedParams& d,
                                      const std::vector<DiffusionFn>& g_orbit, int replicas,
                                      const EquilibriumBudget& budget, std::uint64_t seed) {
  require(k >= 0 && k <= p.levels, "chain depth exceeds the stored coefficients");
  require(int(g_orbit.size()) >= k + 1, "orbit must provide F^(l) g for l <= k");
  require(replicas >= 2, "need at least two replicas");
  ChainSamples cs;
  cs.k = k;
  cs.start = d.theta_seq[std::size_t(k)];
  cs.x.assign(std::size_t(k + 1), std::vector<double>(std::size_t(replicas)));
  cs.y = cs.x;
  std::vector<EquilibriumSampler> samplers;
  for (int l = 0; l <= k; ++l) samplers.emplace_back(level_coeffs(p, d, l), g_orbit[std::size_t(l)], budget);
  parallel_for(std::size_t(replicas), [&](std::size_t r) {
    Stream rng = make_stream(seed, "interaction-chain", r, 0);
    // fast colours m <= k start equalised at vartheta_k
    double x = cs.start;
    for (int l = k; l >= 0; --l) {
      const Eigen::Vector2d z = samplers[std::size_t(l)].sample(x, x, rng);
      x = z(0);
      cs.x[std::size_t(l)][r] = x;
      cs.y[std::size_t(l)][r] = z(1);
    }
  });
  return cs;
}

std::vector<double> volatility_profile(int k, const ClusteringCoefficients& cc) {
  require(k >= 0 && k < cc.n_max(), "profile depth exceeds the computed coefficients");
  const double top = cc.block(0, k);
  std::vector<double> f;
  for (int l = 0; l <= k; ++l) f.push_back(cc.block(0, l) / top);
  return f;
}

const char* profile_name(ProfileClass c) {
  switch (c) {
    case ProfileClass::fast:
      return "fast";
    case ProfileClass::diffusive:
      return "diffusive";
    case ProfileClass::slow:
      return "slow";
  }
  return "";
}

ProfileClass classify_profile(const std::vector<double>& f, double eps) {
  require(f.size() >= 2, "profile too short to classify");
  const double k = double(f.size() - 1);
  std::size_t l = 0;
  while (l < f.size() && f[l] < eps) ++l;
  const double q = double(l) / k;
  if (q >= 0.85) return ProfileClass::fast;
  if (q <= 0.15) return ProfileClass::slow;
  return ProfileClass::diffusive;
}

}  // namespace hfw
