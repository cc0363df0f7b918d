#include "hfw/forward.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "hfw/error.hpp"
#include "hfw/io.hpp"
#include "hfw/pair.hpp"
#include "hfw/parallel.hpp"

namespace hfw {

SystemState::SystemState(int N_, int levels_) : N(N_), levels(levels_) {
  const std::size_t n = ipow(std::uint64_t(N), levels + 1);
  x.assign(n, 0.0);
  y.assign(n * std::size_t(levels + 1), 0.0);
}

static double draw(InitSpec::Law law, double theta, double conc, Stream& rng) {
  switch (law) {
    case InitSpec::Law::constant:
      return theta;
    case InitSpec::Law::beta:
      if (theta <= 0.0 || theta >= 1.0) return theta;
      return rng.beta(theta * conc, (1.0 - theta) * conc);
    case InitSpec::Law::two_point:
      return rng.uniform() < theta ? 1.0 : 0.0;
  }
  return theta;
}

SystemState initial_state(const ModelParams& p, Stream& rng) {
  SystemState s(p.N, p.levels);
  const auto& in = p.init;
  for (std::size_t i = 0; i < s.colonies(); ++i) {
    s.x[i] = draw(in.law, in.theta_x, in.concentration, rng);
    for (int m = 0; m < s.colours(); ++m) s.ym(i, m) = draw(in.law, in.theta_y_at(m), in.concentration, rng);
  }
  return s;
}

SystemState constant_state(const ModelParams& p, double x, double y) {
  SystemState s(p.N, p.levels);
  std::fill(s.x.begin(), s.x.end(), x);
  std::fill(s.y.begin(), s.y.end(), y);
  return s;
}

double stability_rate(const ModelParams& p) {
  double chi = 0.0;
  for (int m = 0; m <= p.levels; ++m) chi += p.K[m] * p.wake_rate(m);
  return total_jump_rate(p.kernel()) + chi;
}

double default_dt(const ModelParams& p) {
  return 0.1 / (stability_rate(p) + p.g.lipschitz_bound());
}

ForwardStepper::ForwardStepper(const ModelParams& p, double dt, ExchangeScheme scheme, int refine)
    : p_(p), dt_(dt), scheme_(scheme), refine_(refine) {
  require(dt > 0, "dt must be positive");
  require(refine >= 0 && refine <= 30, "refine must lie in [0, 30]");
  const double rate = stability_rate(p);
  if (dt * rate > 1.0)
    throw StabilityError("dt " + num(dt) + " exceeds the stability bound 1/" + num(rate));
  const KernelSpec spec = p.kernel();
  for (int k = 1; k <= spec.truncation(); ++k) keep_.push_back(std::exp(-spec.level_weight(k) * dt));
  const double h = 0.5 * dt;
  for (int m = 0; m <= p.levels; ++m) {
    const double r = p.wake_rate(m);
    relax_.push_back(std::exp(-(1.0 + p.K[m]) * r * h));
    flux_.push_back(r * h);
  }
}

void ForwardStepper::exchange(SystemState& s) const {
  const int C = s.colours();
  for (std::size_t i = 0; i < s.colonies(); ++i) {
    double x = s.x[i];
    if (scheme_ == ExchangeScheme::exact) {
      for (int m = 0; m < C; ++m) {
        const double K = p_.K[m];
        double& y = s.ym(i, m);
        const double mean = (x + K * y) / (1.0 + K);
        const double d = (x - y) * relax_[m];
        x = mean + K / (1.0 + K) * d;
        y = mean - d / (1.0 + K);
      }
    } else {
      double dx = 0.0;
      for (int m = 0; m < C; ++m) {
        double& y = s.ym(i, m);
        const double f = flux_[m] * (x - y);
        dx -= p_.K[m] * f;
        y += f;
      }
      x += dx;
    }
    s.x[i] = x;
  }
}

void ForwardStepper::migrate(SystemState& s) const {
  const std::size_t n = s.colonies();
  std::size_t bs = 1;
  for (std::size_t k = 0; k < keep_.size(); ++k) {
    bs *= std::size_t(s.N);
    const double a = keep_[k];
    if (a == 1.0) continue;
    for (std::size_t b0 = 0; b0 < n; b0 += bs) {
      double sum = 0.0;
      for (std::size_t i = b0; i < b0 + bs; ++i) sum += s.x[i];
      const double mean = sum / double(bs);
      for (std::size_t i = b0; i < b0 + bs; ++i) s.x[i] = a * s.x[i] + (1.0 - a) * mean;
    }
  }
}

void ForwardStepper::step(SystemState& s, Stream& rng, StepStats* stats) const {
  exchange(s);
  migrate(s);
  exchange(s);
  std::uint64_t clips = 0;
  double over = 0.0;
  const double hmin = std::ldexp(dt_, -refine_);
  for (double& x : s.x) {
    bool clipped = false;
    for (double rem = dt_; rem > 0.0;) {
      const double g = p_.g(x);
      if (g <= 0.0) break;
      const double dist = 0.25 * std::min(x, 1.0 - x);
      double h = rem;
      while (h > hmin && g * h > dist * dist) h *= 0.5;
      if (rem - h < 1e-12 * dt_) h = rem;
      x += std::sqrt(g * h) * rng.normal();
      if (x < 0.0 || x > 1.0) {
        clipped = true;
        const double c = std::clamp(x, 0.0, 1.0);
        over += std::abs(x - c);
        x = c;
      }
      rem -= h;
    }
    clips += clipped;
  }
  for (double& y : s.y) y = std::clamp(y, 0.0, 1.0);
  s.t += dt_;
  if (stats) {
    stats->updates += s.colonies();
    stats->clips += clips;
    stats->overshoot += over;
  }
}

void step(SystemState& s, double dt, const ModelParams& p, Stream& rng, StepStats* stats) {
  ForwardStepper(p, dt).step(s, rng, stats);
}

BlockAverage block_average(const SystemState& s, int l) {
  require(l >= 0 && l <= s.levels + 1, "block level outside the truncated group");
  const std::size_t n = ipow(std::uint64_t(s.N), l);
  BlockAverage b;
  b.y.assign(std::size_t(s.colours()), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    b.x += s.x[i];
    for (int m = 0; m < s.colours(); ++m) b.y[m] += s.ym(i, m);
  }
  b.x /= double(n);
  for (double& v : b.y) v /= double(n);
  return b;
}

Estimators estimators(const SystemState& s, const ModelParams& p, int l) {
  const BlockAverage b = block_average(s, l);
  Estimators e;
  e.theta_x = b.x;
  e.theta_y = b.y;
  const int top = std::min(l, s.colours());
  double sK = 0.0;
  for (int m = 0; m < top; ++m) sK += p.K[m];
  const std::size_t n = ipow(std::uint64_t(s.N), l);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = s.x[i];
    for (int m = 0; m < top; ++m) v += p.K[m] * s.ym(i, m);
    acc += v / (1.0 + sK);
  }
  e.theta_bar = acc / double(n);
  return e;
}

double grand_mean(const SystemState& s, const ModelParams& p) {
  return estimators(s, p, s.levels + 1).theta_bar;
}

void TrajectoryRecord::write_csv(std::ostream& os) const {
  os << "t,level,component,value\n";
  for (const auto& r : rows) csv_row(os, r.t, r.level, r.component, r.value);
}

void TrajectoryRecord::write_snapshots(std::ostream& os) const {
  if (snapshots.empty()) return;
  os << "t,address";
  os << ",x";
  for (int m = 0; m < snapshots.front().colours(); ++m) os << ",y" << m;
  os << '\n';
  for (const auto& s : snapshots) {
    for (std::size_t i = 0; i < s.colonies(); ++i) {
      os << num(s.t) << ',' << HierAddress::from_index(i, s.N, s.levels + 1).to_string() << ','
         << num(s.x[i]);
      for (int m = 0; m < s.colours(); ++m) os << ',' << num(s.ym(i, m));
      os << '\n';
    }
  }
}

double TrajectoryRecord::value(double t, int level, const std::string& component) const {
  for (const auto& r : rows)
    if (r.t == t && r.level == level && r.component == component) return r.value;
  throw ParameterError("no record for " + component + " at level " + std::to_string(level));
}

static void record(TrajectoryRecord& rec, const SystemState& s, const ModelParams& p,
                   const RecordPlan& plan, double t) {
  for (int l : plan.levels) {
    const Estimators e = estimators(s, p, l);
    rec.rows.push_back({t, l, "theta_x", e.theta_x});
    for (int m = 0; m < s.colours(); ++m)
      rec.rows.push_back({t, l, "theta_y" + std::to_string(m), e.theta_y[m]});
    rec.rows.push_back({t, l, "theta_bar", e.theta_bar});
  }
  rec.rows.push_back({t, s.levels + 1, "grand_mean", grand_mean(s, p)});
  if (plan.snapshots) {
    rec.snapshots.push_back(s);
    rec.snapshots.back().t = t;
  }
}

TrajectoryRecord simulate(const ModelParams& p, const SystemState& init, const RecordPlan& plan,
                          Stream& rng, const SimOptions& opt) {
  require(!plan.times.empty(), "record plan needs at least one time");
  require(std::is_sorted(plan.times.begin(), plan.times.end()) && plan.times.front() >= 0,
          "record times must be sorted and non-negative");
  for (int l : plan.levels) require(l >= 0 && l <= p.levels + 1, "record level outside the truncated group");
  const double dt = opt.dt > 0 ? opt.dt : default_dt(p);
  TrajectoryRecord rec;
  SystemState s = init;
  s.t = 0.0;
  for (double target : plan.times) {
    const double span = target - s.t;
    if (span > 0) {
      // equal sub-steps landing exactly on the record time
      const long n = std::max(1L, long(std::ceil(span / dt - 1e-9)));
      const ForwardStepper st(p, span / double(n), opt.scheme, opt.refine);
      for (long i = 0; i < n; ++i) st.step(s, rng, &rec.stats);
    }
    s.t = target;
    record(rec, s, p, plan, target);
  }
  rec.clip_flagged = rec.stats.clip_fraction() > 0.01;
  return rec;
}

TrajectoryRecord simulate(const ModelParams& p, const RecordPlan& plan, Stream& rng,
                          const SimOptions& opt) {
  const SystemState init = initial_state(p, rng);
  return simulate(p, init, plan, rng, opt);
}

MeanSE EnsembleSummary::get(double t, int level, const std::string& component) const {
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].t == t && rows[i].level == level && rows[i].component == component)
      return {rows[i].value, se[i]};
  throw ParameterError("no ensemble entry for " + component);
}

EnsembleSummary simulate_ensemble(const ModelParams& p, const RecordPlan& plan, int replicas,
                                  std::uint64_t seed, const std::string& task,
                                  const SimOptions& opt) {
  require(replicas >= 2, "ensemble needs at least two replicas");
  std::vector<TrajectoryRecord> recs(static_cast<std::size_t>(replicas));
  parallel_for(recs.size(), [&](std::size_t r) {
    Stream rng = make_stream(seed, task, r, 0);
    recs[r] = simulate(p, plan, rng, opt);
    recs[r].snapshots.clear();
  });
  EnsembleSummary out;
  out.rows = recs.front().rows;
  const std::size_t n = out.rows.size();
  std::vector<double> s1(n, 0.0), s2(n, 0.0);
  for (const auto& rec : recs) {
    for (std::size_t i = 0; i < n; ++i) {
      s1[i] += rec.rows[i].value;
      s2[i] += rec.rows[i].value * rec.rows[i].value;
    }
    out.stats.updates += rec.stats.updates;
    out.stats.clips += rec.stats.clips;
    out.stats.overshoot += rec.stats.overshoot;
  }
  const double R = replicas;
  out.se.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = s1[i] / R;
    out.rows[i].value = m;
    out.se[i] = std::sqrt(std::max(0.0, s2[i] / R - m * m) / (R - 1.0));
  }
  return out;
}

PairMeans mv_mean(double theta_x, double theta_y, double K, double e, double t) {
  const double theta = (theta_x + K * theta_y) / (1.0 + K);
  const double f = std::exp(-(K + 1.0) * e * t) * (theta_x - theta_y) / (1.0 + K);
  return {theta + K * f, theta - f};
}

McKeanVlasovResult simulate_mckean_vlasov(double c, double K, double e, const DiffusionFn& g,
                                          double theta_x, double theta_y,
                                          const std::vector<double>& times, int replicas,
                                          double dt, std::uint64_t seed) {
  require(replicas >= 2 && dt > 0, "need replicas >= 2 and dt > 0");
  require(std::is_sorted(times.begin(), times.end()), "times must be sorted");
  const double theta = (theta_x + K * theta_y) / (1.0 + K);
  const double amp = K / (1.0 + K) * (theta_x - theta_y);
  const double lambda = (K + 1.0) * e;
  const Eigen::Vector2d b(c * amp, 0.0);
  const PairCoeffs pc{1.0, c, K, e};

  // one propagator per distinct segment step
  std::vector<PairPropagator> props;
  std::vector<long> nsteps;
  double prev = 0.0;
  for (double t : times) {
    const double span = t - prev;
    const long n = span > 0 ? std::max(1L, long(std::ceil(span / dt - 1e-9))) : 0;
    nsteps.push_back(n);
    props.emplace_back(pc, n > 0 ? span / double(n) : dt);
    prev = t;
  }
  const std::size_t T = times.size();
  std::vector<double> xs(std::size_t(replicas) * T), ys(xs.size());
  std::vector<StepStats> st(static_cast<std::size_t>(replicas));
  parallel_for(std::size_t(replicas), [&](std::size_t r) {
    Stream rng = make_stream(seed, "mckean-vlasov", r, 0);
    Eigen::Vector2d z(theta_x, theta_y);
    double t = 0.0;
    for (std::size_t j = 0; j < T; ++j) {
      const PairPropagator& pp = props[j];
      for (long i = 0; i < nsteps[j]; ++i) {
        const double q = g(z(0));
        z = pp.relax(z, theta) + pp.forced(b, lambda, t) + pp.noise(q, rng);
        t += pp.h();
        ++st[r].updates;
        if (z(0) < 0 || z(0) > 1 || z(1) < 0 || z(1) > 1) ++st[r].clips;
        z(0) = std::clamp(z(0), 0.0, 1.0);
        z(1) = std::clamp(z(1), 0.0, 1.0);
      }
      xs[r * T + j] = z(0);
      ys[r * T + j] = z(1);
    }
  });
  McKeanVlasovResult res;
  res.times = times;
  const double R = replicas;
  for (std::size_t j = 0; j < T; ++j) {
    double sx = 0, sxx = 0, sy = 0, syy = 0;
    for (std::size_t r = 0; r < std::size_t(replicas); ++r) {
      sx += xs[r * T + j];
      sxx += xs[r * T + j] * xs[r * T + j];
      sy += ys[r * T + j];
      syy += ys[r * T + j] * ys[r * T + j];
    }
    const double mx = sx / R, my = sy / R;
    res.x.push_back({mx, std::sqrt(std::max(0.0, sxx / R - mx * mx) / (R - 1))});
    res.y.push_back({my, std::sqrt(std::max(0.0, syy / R - my * my) / (R - 1))});
  }
  for (const auto& s : st) {
    res.stats.updates += s.updates;
    res.stats.clips += s.clips;
  }
  return res;
}

SystemState first_moment_oracle(const ModelParams& p, const SystemState& z, double t,
                                std::size_t max_states) {
  require(t >= 0, "time must be non-negative");
  require(z.N == p.N && z.levels == p.levels, "state geometry does not match the parameters");
  const std::size_t states = z.colonies() * std::size_t(1 + z.colours());
  if (states > max_states)
    throw SizeError("single-lineage state space has " + std::to_string(states) +
                    " states, above the limit " + std::to_string(max_states));
  if (t == 0) return z;
  const KernelSpec spec = p.kernel();
  const int C = z.colours();
  double chi = 0.0, rmax = 0.0;
  for (int m = 0; m < C; ++m) {
    chi += p.K[m] * p.wake_rate(m);
    rmax = std::max(rmax, p.wake_rate(m));
  }
  const double Lam = std::max(outflow_rate(spec) + chi, rmax);
  std::vector<double> w;
  for (int k = 1; k <= spec.truncation(); ++k) w.push_back(spec.level_weight(k));

  // u <- (I + Q/Lam) u, with Q the forward-mean generator
  auto apply = [&](const SystemState& u) {
    SystemState v = u;
    const std::size_t n = u.colonies();
    std::vector<double> mig(n, 0.0);
    std::size_t bs = 1;
    for (double wk : w) {
      bs *= std::size_t(u.N);
      for (std::size_t b0 = 0; b0 < n; b0 += bs) {
        double s = 0.0;
        for (std::size_t i = b0; i < b0 + bs; ++i) s += u.x[i];
        const double mean = s / double(bs);
        for (std::size_t i = b0; i < b0 + bs; ++i) mig[i] += wk * (mean - u.x[i]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double dx = mig[i];
      for (int m = 0; m < C; ++m) {
        const double r = p.wake_rate(m);
        dx += p.K[m] * r * (u.ym(i, m) - u.x[i]);
        v.ym(i, m) = u.ym(i, m) + r * (u.x[i] - u.ym(i, m)) / Lam;
      }
      v.x[i] = u.x[i] + dx / Lam;
    }
    return v;
  };

  const double mu = Lam * t;
  const long nmax = long(mu + 12.0 * std::sqrt(mu) + 30.0);
  SystemState acc = z, u = z;
  std::fill(acc.x.begin(), acc.x.end(), 0.0);
  std::fill(acc.y.begin(), acc.y.end(), 0.0);
  for (long k = 0; k <= nmax; ++k) {
    const double wk = std::exp(-mu + double(k) * std::log(mu) - std::lgamma(double(k) + 1.0));
    for (std::size_t i = 0; i < acc.x.size(); ++i) acc.x[i] += wk * u.x[i];
    for (std::size_t i = 0; i < acc.y.size(); ++i) acc.y[i] += wk * u.y[i];
    if (k < nmax) u = apply(u);
  }
  acc.t = z.t + t;
  return acc;
}

}  // namespace hfw
