#include "hfw/dual.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <sstream>

#include "hfw/error.hpp"
#include "hfw/io.hpp"
#include "hfw/parallel.hpp"

namespace hfw {

DualConfig::DualConfig(int N_, int levels_) : N(N_), levels(levels_) {
  counts.assign(ipow(std::uint64_t(N), levels + 1) * std::size_t(levels + 2), 0);
}

int DualConfig::total() const {
  int s = 0;
  for (int c : counts) s += c;
  return s;
}

const char* event_name(DualEvent e) {
  switch (e) {
    case DualEvent::migration:
      return "migration";
    case DualEvent::coalescence:
      return "coalescence";
    case DualEvent::deactivation:
      return "deactivation";
    case DualEvent::activation:
      return "activation";
  }
  return "";
}

static double resampling_rate(const ModelParams& p) {
  if (!p.d || !p.g.is_fisher_wright())
    throw UnsupportedError("the dual requires g = d g_FW; got " + p.g.describe());
  return *p.d;
}

static void check_geometry(const DualConfig& cfg, const ModelParams& p) {
  require(cfg.N == p.N && cfg.levels == p.levels, "dual configuration does not match the parameters");
}

std::vector<RateEntry> dual_event_rates(const DualConfig& cfg, const ModelParams& p) {
  check_geometry(cfg, p);
  const double d = resampling_rate(p);
  const double out = outflow_rate(p.kernel());
  std::vector<RateEntry> t;
  for (std::size_t s = 0; s < cfg.colonies(); ++s) {
    const int m = cfg.active(s);
    if (m > 0) {
      t.push_back({DualEvent::migration, s, -1, m * out});
      if (m > 1 && d > 0) t.push_back({DualEvent::coalescence, s, -1, d * 0.5 * m * (m - 1)});
      for (int c = 0; c <= p.levels; ++c)
        t.push_back({DualEvent::deactivation, s, c, m * p.K[c] * p.wake_rate(c)});
    }
    for (int c = 0; c <= p.levels; ++c) {
      const int n = cfg.dormant(s, c);
      if (n > 0) t.push_back({DualEvent::activation, s, c, n * p.wake_rate(c)});
    }
  }
  return t;
}

static void apply_event(DualConfig& cfg, const RateEntry& e, std::size_t target) {
  switch (e.kind) {
    case DualEvent::migration:
      --cfg.active(e.site);
      ++cfg.active(target);
      break;
    case DualEvent::coalescence:
      --cfg.active(e.site);
      break;
    case DualEvent::deactivation:
      --cfg.active(e.site);
      ++cfg.dormant(e.site, e.colour);
      break;
    case DualEvent::activation:
      --cfg.dormant(e.site, e.colour);
      ++cfg.active(e.site);
      break;
  }
}

DualRun simulate_dual(const DualConfig& cfg0, const ModelParams& p, double horizon, Stream& rng,
                      bool keep_log) {
  require(horizon >= 0, "horizon must be non-negative");
  for (int c : cfg0.counts) require(c >= 0, "dual counts must be non-negative");
  check_geometry(cfg0, p);
  const JumpSampler js(p.kernel());
  DualRun run;
  run.terminal = cfg0;
  double t = 0.0;
  for (;;) {
    const auto rates = dual_event_rates(run.terminal, p);
    double total = 0.0;
    for (const auto& r : rates) total += r.rate;
    if (total <= 0.0) break;
    t += rng.exponential(total);
    if (t > horizon) break;
    double u = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < rates.size() && u >= rates[k].rate) u -= rates[k++].rate;
    const RateEntry& e = rates[k];
    std::size_t target = e.site;
    if (e.kind == DualEvent::migration) target = js.sample_moving(e.site, rng);
    apply_event(run.terminal, e, target);
    if (keep_log) run.log.push_back({t, e.kind, e.kind == DualEvent::migration ? target : e.site, e.colour});
  }
  return run;
}

void write_event_log(std::ostream& os, const std::vector<EventLogRow>& log, int N, int levels) {
  os << "t,event,site,colour\n";
  for (const auto& r : log) {
    os << num(r.t) << ',' << event_name(r.kind) << ','
       << HierAddress::from_index(r.site, N, levels + 1).to_string() << ',';
    if (r.colour >= 0) os << r.colour;
    os << '\n';
  }
}

double duality_H(const SystemState& z, const DualConfig& l) {
  require(z.N == l.N && z.levels == l.levels, "state and dual geometry differ");
  double h = 1.0;
  for (std::size_t s = 0; s < l.colonies(); ++s) {
    if (l.active(s)) h *= std::pow(z.x[s], l.active(s));
    for (int m = 0; m < z.colours(); ++m)
      if (l.dormant(s, m)) h *= std::pow(z.ym(s, m), l.dormant(s, m));
  }
  return h;
}

DualGenerator build_dual_generator(const DualConfig& cfg0, const ModelParams& p,
                                   std::size_t max_states) {
  check_geometry(cfg0, p);
  const double d = resampling_rate(p);
  const KernelSpec spec = p.kernel();
  const std::size_t n = cfg0.colonies();
  // migration rates between colonies
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j)
        a[i * n + j] = migration_rate(HierAddress::from_index(i, p.N, p.levels + 1),
                                      HierAddress::from_index(j, p.N, p.levels + 1), spec);
  DualGenerator g;
  std::map<DualConfig, std::size_t> index;
  std::vector<std::vector<std::pair<std::size_t, double>>> edges;
  std::deque<std::size_t> todo;
  auto intern = [&](const DualConfig& c) {
    auto it = index.find(c);
    if (it != index.end()) return it->second;
    if (g.states.size() >= max_states)
      throw SizeError("dual state space exceeds " + std::to_string(max_states) + " states");
    const std::size_t id = g.states.size();
    index.emplace(c, id);
    g.states.push_back(c);
    edges.emplace_back();
    todo.push_back(id);
    return id;
  };
  intern(cfg0);
  while (!todo.empty()) {
    const std::size_t id = todo.front();
    todo.pop_front();
    const DualConfig c = g.states[id];
    auto add = [&](DualConfig nc, double rate) {
      if (rate <= 0) return;
      const std::size_t j = intern(nc);
      edges[id].push_back({j, rate});
    };
    for (std::size_t s = 0; s < n; ++s) {
      const int m = c.active(s);
      if (m > 0) {
        for (std::size_t t = 0; t < n; ++t) {
          if (t == s) continue;
          DualConfig nc = c;
          --nc.active(s);
          ++nc.active(t);
          add(nc, m * a[s * n + t]);
        }
        if (m > 1) {
          DualConfig nc = c;
          --nc.active(s);
          add(nc, d * 0.5 * m * (m - 1));
        }
        for (int k = 0; k <= p.levels; ++k) {
          DualConfig nc = c;
          --nc.active(s);
          ++nc.dormant(s, k);
          add(nc, m * p.K[k] * p.wake_rate(k));
        }
      }
      for (int k = 0; k <= p.levels; ++k) {
        const int nd = c.dormant(s, k);
        if (nd == 0) continue;
        DualConfig nc = c;
        --nc.dormant(s, k);
        ++nc.active(s);
        add(nc, nd * p.wake_rate(k));
      }
    }
  }
  const std::size_t S = g.states.size();
  g.Q = Eigen::MatrixXd::Zero(Eigen::Index(S), Eigen::Index(S));
  for (std::size_t i = 0; i < S; ++i)
    for (const auto& [j, r] : edges[i]) {
      g.Q(Eigen::Index(i), Eigen::Index(j)) += r;
      g.Q(Eigen::Index(i), Eigen::Index(i)) -= r;
    }
  return g;
}

Eigen::VectorXd dual_distribution(const DualGenerator& gen, double t) {
  require(t >= 0, "time must be non-negative");
  const Eigen::MatrixXd P = (gen.Q * t).exp();
  return P.row(0).transpose();
}

double dual_expectation_exact(const ModelParams& p, const SystemState& z, const DualConfig& l,
                              double t, std::size_t max_states) {
  const DualGenerator gen = build_dual_generator(l, p, max_states);
  const Eigen::VectorXd pr = dual_distribution(gen, t);
  double s = 0.0;
  for (std::size_t i = 0; i < gen.states.size(); ++i) s += pr(Eigen::Index(i)) * duality_H(z, gen.states[i]);
  return s;
}

static MeanSE mean_se(const std::vector<double>& v) {
  double s = 0, ss = 0;
  for (double x : v) {
    s += x;
    ss += x * x;
  }
  const double n = double(v.size());
  const double m = s / n;
  return {m, std::sqrt(std::max(0.0, ss / n - m * m) / (n - 1))};
}

std::vector<std::vector<DualityReport>> duality_estimate(const ModelParams& p, const SystemState& z,
                                                         const std::vector<DualConfig>& ls,
                                                         const std::vector<double>& times,
                                                         int replicas, std::uint64_t seed,
                                                         const DualityOptions& opt) {
  resampling_rate(p);
  require(replicas >= 2, "need at least two replicas");
  require(!ls.empty() && !times.empty(), "need at least one dual configuration and one time");
  require(std::is_sorted(times.begin(), times.end()) && times.front() >= 0,
          "times must be sorted and non-negative");
  require(opt.forward_dt > 0, "forward dt must be positive");
  for (const auto& l : ls) check_geometry(l, p);
  require(z.N == p.N && z.levels == p.levels, "forward state does not match the parameters");
  const std::size_t R = static_cast<std::size_t>(replicas), nl = ls.size(), nt = times.size();
  // lhs[(i * nt + j) * R + r]: configuration i, time j, replica r
  std::vector<double> lhs(nl * nt * R), rhs(lhs.size());
  // equal sub-steps between consecutive record times
  std::vector<long> steps(nt);
  std::vector<ForwardStepper> steppers;
  double prev = 0;
  for (std::size_t j = 0; j < nt; ++j) {
    const double gap = times[j] - prev;
    steps[j] = gap > 0 ? std::max(1L, long(std::ceil(gap / opt.forward_dt - 1e-9))) : 0;
    steppers.emplace_back(p, steps[j] > 0 ? gap / double(steps[j]) : opt.forward_dt);
    prev = times[j];
  }
  parallel_for(R, [&](std::size_t r) {
    Stream fr = make_stream(seed, "duality-forward", r, 0);
    SystemState s = z;
    for (std::size_t j = 0; j < nt; ++j) {
      for (long k = 0; k < steps[j]; ++k) steppers[j].step(s, fr);
      for (std::size_t i = 0; i < nl; ++i) lhs[(i * nt + j) * R + r] = duality_H(s, ls[i]);
    }
    for (std::size_t i = 0; i < nl; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        Stream dr = make_stream(seed, "duality-dual", r, i * nt + j);
        rhs[(i * nt + j) * R + r] = duality_H(z, simulate_dual(ls[i], p, times[j], dr, false).terminal);
      }
  });
  std::vector<std::vector<DualityReport>> out(nl, std::vector<DualityReport>(nt));
  for (std::size_t i = 0; i < nl; ++i) {
    std::optional<DualGenerator> gen;
    if (opt.with_exact) gen = build_dual_generator(ls[i], p, opt.max_states);
    for (std::size_t j = 0; j < nt; ++j) {
      DualityReport& rep = out[i][j];
      rep.t = times[j];
      const auto first = lhs.begin() + std::ptrdiff_t((i * nt + j) * R);
      rep.lhs = mean_se(std::vector<double>(first, first + std::ptrdiff_t(R)));
      const auto rfirst = rhs.begin() + std::ptrdiff_t((i * nt + j) * R);
      rep.rhs = mean_se(std::vector<double>(rfirst, rfirst + std::ptrdiff_t(R)));
      if (gen) {
        const Eigen::VectorXd pr = dual_distribution(*gen, times[j]);
        double e = 0.0;
        for (std::size_t k = 0; k < gen->states.size(); ++k)
          e += pr(Eigen::Index(k)) * duality_H(z, gen->states[k]);
        rep.exact = e;
      }
      rep.diff = std::abs(rep.lhs.mean - rep.rhs.mean);
      rep.combined_se = std::hypot(rep.lhs.se, rep.rhs.se);
      rep.pass = rep.diff < 3.0 * rep.combined_se || (rep.combined_se == 0 && rep.diff < 1e-12);
    }
  }
  return out;
}

DualityReport duality_estimate(const ModelParams& p, const SystemState& z, const DualConfig& l,
                               double t, int replicas, std::uint64_t seed,
                               const DualityOptions& opt) {
  return duality_estimate(p, z, std::vector<DualConfig>{l}, std::vector<double>{t}, replicas, seed,
                          opt)[0][0];
}

std::string DualityReport::to_kv() const {
  std::ostringstream os;
  os << "t=" << num(t) << "\nlhs=" << num(lhs.mean) << "\nlhs_se=" << num(lhs.se)
     << "\nrhs=" << num(rhs.mean) << "\nrhs_se=" << num(rhs.se)
     << "\nexact=" << (exact ? num(*exact) : std::string("unavailable"))
     << "\nabs_diff=" << num(diff) << "\ncombined_se=" << num(combined_se)
     << "\npass=" << (pass ? "true" : "false") << '\n';
  return os.str();
}

nlohmann::json DualityReport::to_json() const {
  nlohmann::json j;
  j["t"] = t;
  j["lhs"] = lhs.mean;
  j["lhs_se"] = lhs.se;
  j["rhs"] = rhs.mean;
  j["rhs_se"] = rhs.se;
  j["exact"] = exact ? nlohmann::json(*exact) : nlohmann::json(nullptr);
  j["abs_diff"] = diff;
  j["combined_se"] = combined_se;
  j["pass"] = pass;
  return j;
}

RenewalSample renewal_sample(const ModelParams& p, std::size_t n, Stream& rng) {
  const WakeupSampler ws(p);
  RenewalSample r;
  r.sigma.reserve(n);
  r.tau.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.sigma.push_back(rng.exponential(ws.chi()));
    r.tau.push_back(ws(rng));
  }
  return r;
}

static double hill(const std::vector<double>& desc, std::size_t k) {
  double s = 0.0;
  const double ref = std::log(desc[k]);
  for (std::size_t i = 0; i < k; ++i) s += std::log(desc[i]) - ref;
  return double(k) / s;
}

TailFit tail_fit(const std::vector<double>& sample, double top_fraction) {
  require(sample.size() >= 10000, "tail fit needs at least 10^4 samples");
  require(top_fraction > 0 && top_fraction < 0.5, "top fraction must lie in (0, 0.5)");
  std::vector<double> v = sample;
  std::sort(v.begin(), v.end(), std::greater<>());
  TailFit f;
  f.k = std::size_t(top_fraction * double(v.size()));
  const std::size_t kd = std::max<std::size_t>(f.k / 10, 10);
  require(v[f.k] > 0 && v[kd] > 0, "tail fit needs positive order statistics");
  f.gamma = hill(v, f.k);
  f.gamma_deep = hill(v, kd);
  f.power_law = std::abs(f.gamma_deep / f.gamma - 1.0) < 0.25;
  return f;
}

}  // namespace hfw
