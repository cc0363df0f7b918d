// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hfw/dual.hpp"
#include "hfw/forward.hpp"
#include "hfw/params.hpp"
#include "hfw/renorm.hpp"

using namespace hfw;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;
  void note(const char* fmt, ...) __attribute__((format(printf, 2, 3)));
  void check(bool ok) { pass = pass && ok; }
};

void Outcome::note(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  lines.emplace_back(buf);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* ok(bool b) { return b ? "ok" : "MISS"; }

// 1: the five zero-mean functionals of the equilibrium pair
Outcome moment_relations() {
  Outcome o;
  const PairCoeffs sets[] = {{1, 1, 1, 1},       {0.25, 0.25, 4, 4}, {1, 4, 0.25, 0.25},
                             {0.25, 4, 0.25, 4}, {1, 0.25, 4, 0.25}, {0.25, 1, 4, 1}};
  const double thetas[] = {0.1, 0.5, 0.9};
  EquilibriumBudget b;
  b.batches = 50;
  b.horizon = 8000;  // keeps the slowest set, with long stays near 0 and 1, inside 60 s
  for (std::size_t s = 0; s < 6; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0;
    bool flagged = false;
    for (std::size_t i = 0; i < 3; ++i) {
      Stream rng = make_stream(101, "moment-relations", s, i);
      const auto e = mv_equilibrium(sets[s], DiffusionFn::fisher_wright(1), thetas[i], b, rng);
      for (const auto& id : e.identity) worst = std::max(worst, std::abs(id.mean) / id.se);
      flagged = flagged || e.flagged;
    }
    const double sec = seconds_since(t0);
    const bool good = worst < 3 && sec <= 60;
    o.check(good);
    const auto& p = sets[s];
    o.note("(E,c,K,e)=(%g,%g,%g,%g): max |identity|/SE %.2f, %.1f s%s  %s", p.E, p.c, p.K, p.e, worst, sec,
           flagged ? ", stationarity flag" : "", ok(good));
  }
  return o;
}

// 2: F maps d g_FW to d/(1 + d A_0^0) g_FW
Outcome fw_closure() {
  Outcome o;
  const PairCoeffs pc{1, 1, 1, 1};
  const auto cc = compute_A({pc.c}, {pc.e}, {pc.K}, 1);
  const double d1 = fw_recursion_oracle(1.0, 1, cc)[1];
  std::vector<double> nodes{0};
  for (int i = 1; i <= 9; ++i) nodes.push_back(0.1 * i);
  nodes.push_back(1);
  const auto f = evaluate_F(DiffusionFn::fisher_wright(1), pc, nodes, EquilibriumBudget{}, 202);
  double worst = 0;
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    const double th = nodes[i], want = d1 * th * (1 - th), z = std::abs(f.g(th) - want) / f.se[i];
    worst = std::max(worst, z);
    o.note("theta %.1f: F g %.5f +- %.5f, oracle %.5f, z %.2f", th, f.g(th), f.se[i], want, z);
  }
  const double half = f.g(0.5);
  const bool at_half = std::abs(half - 0.1875) < 3 * f.se[5];
  o.check(worst < 3 && at_half && std::abs(d1 * 0.25 - 0.1875) < 1e-15);
  o.note("(F g_FW)(1/2) = %.5f vs 3/16 %s; max z %.2f", half, ok(at_half), worst);
  return o;
}

// 3: the orbit of g = x^2(1-x)^2 approaches g_FW when clustering and stalls otherwise
Outcome universality() {
  Outcome o;
  EquilibriumBudget b;
  b.kappa = 0.02;
  b.horizon = 2000;
  const int levels = 7;
  const auto g = DiffusionFn::power(1, 2);
  auto orbit = [&](double c) {
    const auto p = ModelParams::from_family(Family::exponential(2, 1, c), 8, levels, g);
    const auto r = classify_regime(p);
    const auto rep = iterate_F_scaled(g, p, derive(p), levels, b, 303);
    std::vector<double> dist;
    std::string s;
    for (int n = 1; n <= levels; ++n) {
      dist.push_back(rep.levels[std::size_t(n)].sup_distance);
      char buf[32];
      std::snprintf(buf, sizeof buf, " %.3f", dist.back());
      s += buf;
    }
    o.note("c=%g (%s):%s", c, verdict_name(clustering_verdict(p, r)), s.c_str());
    return dist;
  };
  const auto cl = orbit(0.25);
  bool dec = true;
  for (int n = 1; n < 5; ++n) dec = dec && cl[std::size_t(n)] < cl[std::size_t(n - 1)];
  const bool small = cl.back() < 0.05;
  const auto co = orbit(1.0);
  double floor = 1e9;
  for (int n = 2; n < levels; ++n) floor = std::min(floor, co[std::size_t(n)]);
  const bool plateau = floor > 0.1;
  o.check(dec && small && plateau);
  o.note("clustering: decreasing over 1..5 %s, final %.3f < 0.05 %s; coexistence: min over levels 3..7 %.3f > 0.1 %s",
         ok(dec), cl.back(), ok(small), floor, ok(plateau));
  return o;
}

// 4: A_n against the stated asymptotes
Outcome asymptotics() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  struct Row {
    Family f;
    int N;
  };
  const Row rows[] = {{Family::polynomial(0.5, 2, 0), 2},     {Family::polynomial(0.5, 2, -0.5), 2},
                      {Family::polynomial(1, 2, 0), 2},       {Family::polynomial(1, 2, -1), 2},
                      {Family::exponential(2, 1, 0.25), 8},   {Family::exponential(2, 1, 0.5), 8},
                      {Family::exponential(2, 0.125, 0.25), 8}, {Family::exponential(2, 0.25, 0.5), 8},
                      {Family::exponential(2, 1.0 / 16, 0.25), 8}, {Family::exponential(2, 0.125, 0.5), 8},
                      {Family::exponential(1, 1, 0.5), 8},    {Family::exponential(1, 1, 1), 8}};
  std::vector<std::string> lines;
  for (const auto& r : rows) {
    const auto p = ModelParams::from_family(r.f, r.N, 200);
    const auto cc = compute_A(p, derive(p), 201);
    const bool logarithmic = cc.asym.formula.find("log") != std::string::npos;
    const int n = logarithmic ? 200 : 30;
    const double lo = logarithmic ? 0.8 : 0.9, hi = logarithmic ? 1.2 : 1.1;
    const double ratio = cc.A(n) / cc.asym.predict(n);
    const bool good = ratio >= lo && ratio <= hi;
    o.check(good);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %-28s n=%3d ratio %.4f in [%.1f,%.1f] %s", cc.asym.id.c_str(),
                  cc.asym.formula.c_str(), n, ratio, lo, hi, ok(good));
    std::string line = buf;
    if (cc.asym.rederived_constant != cc.asym.constant) {
      std::snprintf(buf, sizeof buf, "; with rederived constant %.4g: ratio %.4f", cc.asym.rederived_constant,
                    cc.A(n) / cc.asym.predict_rederived(n));
      line += buf;
    }
    lines.push_back(line);
  }
  const double sec = seconds_since(t0);
  o.check(sec < 1);
  for (const auto& l : lines) o.note("%s", l.c_str());
  o.note("runtime %.3f s", sec);
  return o;
}

// 5: verdict truth table and hazard agreement
Outcome verdict_table() {
  Outcome o;
  struct Case {
    Family f;
    int N, L;
    Verdict want;
    const char* why;
  };
  const auto CL = Verdict::clusters, CO = Verdict::coexists;
  const Case cases[] = {
      {Family::polynomial(2, 2, -1), 2, 400, CL, "rho<inf, sum 1/c_k = inf (boundary)"},
      {Family::polynomial(2, 2, -2), 2, 400, CO, "rho<inf, sum 1/c_k < inf"},
      {Family::exponential(0.5, 1, 1), 8, 40, CL, "rho<inf, c=1 (boundary)"},
      {Family::exponential(0.5, 1, 2), 8, 40, CO, "rho<inf, c>1"},
      {Family::polynomial(0.5, 2, 0), 2, 400, CL, "alpha<1, -phi<alpha"},
      {Family::polynomial(0.5, 2, -0.5), 2, 400, CL, "-phi=alpha (boundary)"},
      {Family::polynomial(1, 2, 0), 2, 400, CL, "alpha=1 (boundary)"},
      {Family::polynomial(1, 2, -1), 2, 400, CL, "alpha=1=-phi (double boundary)"},
      {Family::polynomial(0.5, 2, -1), 2, 400, CO, "-phi>alpha"},
      {Family::polynomial(1, 2, -1.5), 2, 400, CO, "alpha=1, -phi>1"},
      {Family::exponential(2, 1, 0.25), 256, 50, CL, "Kc<1<K"},
      {Family::exponential(2, 1, 0.5), 256, 50, CL, "Kc=1 (boundary)"},
      {Family::exponential(1, 1, 1), 256, 50, CL, "K=1=Kc (double boundary)"},
      {Family::exponential(1, 1, 0.5), 256, 50, CL, "K=1 (boundary)"},
      {Family::exponential(2, 1, 1), 256, 50, CO, "Kc>1"},
      {Family::exponential(4, 1, 0.5), 256, 50, CO, "Kc>1"}};
  int right = 0, applies = 0, agree = 0;
  for (const auto& c : cases) {
    const auto p = ModelParams::from_family(c.f, c.N, c.L);
    const auto r = classify_regime(p);
    const auto v = clustering_verdict(p, r);
    const bool vr = v == c.want;
    right += vr;
    std::string h = "n/a";
    if (r.rho_infinite.value_or(false)) {
      ++applies;
      const auto hz = hazard_diagnostic(p, r, 1e300);
      const bool a = (hz.verdict == HazardVerdict::divergent && c.want == CL) ||
                     (hz.verdict == HazardVerdict::convergent && c.want == CO);
      agree += a;
      h = std::string(hazard_name(hz.verdict)) + (a ? "" : " MISS");
    }
    o.note("%-48s N=%-3d %-9s %s  hazard %-14s  [%s]", c.f.name().c_str(), c.N, verdict_name(v), ok(vr), h.c_str(),
           c.why);
  }
  o.check(right == 16 && agree == applies && applies == 12);
  o.note("verdicts %d/16, hazard agrees %d/%d", right, agree, applies);
  return o;
}

// 6: duality on two colonies, one colour
Outcome duality() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = ModelParams::from_sequences(2, {1}, {1}, {1}, DiffusionFn::fisher_wright(1));
  SystemState z(2, 0);
  z.x = {0.8, 0.3};
  z.y = {0.6, 0.1};
  DualConfig one(2, 0), two(2, 0);
  one.active(0) = 1;
  two.active(0) = 2;
  const std::vector<double> times{0.5, 1, 2};
  const auto res = duality_estimate(p, z, {one, two}, times, 100000, 606);
  const char* names[] = {"one lineage", "two lineages"};
  for (std::size_t i = 0; i < 2; ++i)
    for (const auto& r : res[i]) {
      const bool exact_ok = std::abs(r.rhs.mean - *r.exact) < 3 * r.rhs.se;
      o.check(r.pass && exact_ok);
      o.note("%-12s t=%.1f: forward %.5f +- %.5f, dual %.5f +- %.5f, exact %.5f, |diff|/SE %.2f %s, dual vs exact %s",
             names[i], r.t, r.lhs.mean, r.lhs.se, r.rhs.mean, r.rhs.se, *r.exact, r.diff / r.combined_se, ok(r.pass),
             ok(exact_ok));
    }
  const double sec = seconds_since(t0);
  o.check(sec < 120);
  o.note("runtime %.1f s", sec);
  return o;
}

// 7: McKean-Vlasov ensemble means follow the closed form for two g's
Outcome mean_oracle() {
  Outcome o;
  const double K = 1, e = 1, c = 1, tx = 0.8, ty = 0.2;
  const std::vector<double> times{0.25, 0.5, 1.0};
  const std::pair<const char*, DiffusionFn> gs[] = {{"g_FW", DiffusionFn::fisher_wright(1)},
                                                    {"x^2(1-x)^2", DiffusionFn::power(1, 2)}};
  for (const auto& [name, g] : gs) {
    const auto r = simulate_mckean_vlasov(c, K, e, g, tx, ty, times, 20000, 0.005, 707);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto m = mv_mean(tx, ty, K, e, times[i]);
      const double zx = std::abs(r.x[i].mean - m.x) / r.x[i].se, zy = std::abs(r.y[i].mean - m.y) / r.y[i].se;
      o.check(zx < 3 && zy < 3);
      o.note("%-10s t=%.2f: x %.5f vs %.5f (z %.2f), y %.5f vs %.5f (z %.2f)", name, times[i], r.x[i].mean, m.x, zx,
             r.y[i].mean, m.y, zy);
    }
  }
  return o;
}

// 8: mean-field finite-system bound and the martingale Theta-bar
Outcome finite_systems() {
  Outcome o;
  const int N = 50;
  InitSpec init;
  init.law = InitSpec::Law::beta;
  init.theta_x = 0.8;
  init.theta_y = {0.2};
  const auto p = ModelParams::from_sequences(N, {1}, {1}, {1}, DiffusionFn::fisher_wright(1), init);
  const double K = 1, e = 1, gnorm = 0.25;
  RecordPlan plan;
  plan.times = {0, 0.25, 0.5, 1, 2, 4};
  plan.levels = {1};
  const int R = 2000;
  const std::size_t nt = plan.times.size();
  std::vector<double> absd(nt, 0), bar_diff(nt, 0), bar_diff2(nt, 0);
  double d0sq = 0;
  for (int r = 0; r < R; ++r) {
    Stream rng = make_stream(808, "finite-systems", std::uint64_t(r));
    const auto tr = simulate(p, plan, rng);
    const double bar0 = tr.value(0, 1, "theta_bar");
    for (std::size_t i = 0; i < nt; ++i) {
      const double t = plan.times[i];
      const double dl = tr.value(t, 1, "theta_x") - tr.value(t, 1, "theta_y0");
      absd[i] += std::abs(dl) / R;
      if (i == 0) d0sq += dl * dl / R;
      const double db = tr.value(t, 1, "theta_bar") - bar0;
      bar_diff[i] += db / R;
      bar_diff2[i] += db * db / R;
    }
  }
  for (std::size_t i = 1; i < nt; ++i) {
    const double t = plan.times[i];
    const double decay = std::sqrt(d0sq) * std::exp(-(K * e + e) * t);
    const double pr22 = decay + std::sqrt(gnorm / (N * (K * e + e)));
    const double pr2 = decay + std::sqrt(2 * gnorm / (N * (K * e + e)));
    const double se = std::sqrt(std::max(0.0, bar_diff2[i] - bar_diff[i] * bar_diff[i]) / R);
    const bool below = absd[i] < pr22;
    const bool flat = std::abs(bar_diff[i]) < 3 * se || bar_diff2[i] == 0;
    o.check(below && flat);
    o.note("t=%.2f: E|Theta_x - Theta_y| %.5f, bound %.5f %s (weaker form %.5f); Theta-bar drift %.2e +- %.1e %s", t,
           absd[i], pr22, ok(below), pr2, bar_diff[i], se, ok(flat));
  }
  return o;
}

// 9: interaction-chain means and variances
Outcome chain_moments() {
  Outcome o;
  const int k = 4;
  InitSpec init;
  init.theta_x = 0.3;
  init.theta_y = {0.6};
  const auto p = ModelParams::from_family(Family::exponential(2, 1, 0.25), 8, k, DiffusionFn::fisher_wright(1), init);
  const auto d = derive(p);
  const auto cc = compute_A(p, d, k + 1);
  const auto dn = fw_recursion_oracle(1.0, k + 1, cc);
  std::vector<DiffusionFn> orbit;
  for (int l = 0; l <= k; ++l) orbit.push_back(DiffusionFn::fisher_wright(dn[std::size_t(l)]));
  EquilibriumBudget b;
  b.kappa = 0.01;
  const auto cs = sample_interaction_chain(k, p, d, orbit, 10000, b, 909);
  const double th = cs.start, fg = dn[std::size_t(k + 1)] * th * (1 - th);
  for (int m = 0; m <= k; ++m) {
    const auto mu = cs.mean(m), var = cs.variance(m);
    const double want = cc.block(m, k) * fg;
    const double zm = std::abs(mu.mean - th) / mu.se, zv = std::abs(var.mean - want) / var.se;
    o.check(zm < 3 && zv < 3);
    o.note("level %d: mean %.5f vs %.5f (z %.2f), variance %.5f vs %.5f (z %.2f)", m, mu.mean, th, zm, var.mean, want,
           zv);
  }
  return o;
}

// 10: wake-up tail exponent
Outcome wakeup_tail() {
  Outcome o;
  const auto p = ModelParams::from_family(Family::exponential(2, 1, 0.25), 8, 20);
  Stream rng = make_stream(1010, "wakeup-tail");
  const auto s = renewal_sample(p, 1000000, rng);
  const auto f = tail_fit(s.tau);
  const double stated = 1.0 / 3.0, formula = std::log(8.0 / 2.0) / std::log(8.0);
  o.check(std::abs(f.gamma - stated) <= 0.05);
  o.note("Hill gamma %.4f (deeper tail %.4f), target 1/3: |diff| %.4f %s", f.gamma, f.gamma_deep,
         std::abs(f.gamma - stated), ok(std::abs(f.gamma - stated) <= 0.05));
  o.note("log(N/(Ke))/log(N/e) = %.4f: |diff| %.4f %s", formula, std::abs(f.gamma - formula),
         ok(std::abs(f.gamma - formula) <= 0.05));
  return o;
}

// 11: every subcommand twice with the same config and seed
Outcome reproducibility() {
  Outcome o;
  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "hfwlab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto cfg = root / "config.yaml";
  std::ofstream(cfg) << R"(seed: 11
model: {N: 3, levels: 1, family: exponential, K: 2, e: 1, c: 0.25}
init: {law: beta, theta_x: 0.4, theta_y: [0.6]}
state:
  x: [0.9, 0.1, 0.5, 0.5, 0.2, 0.7, 0.3, 0.4, 0.6]
  y: [0.5, 0.5, 0.5, 0.5, 0.2, 0.7, 0.3, 0.4, [0.1, 0.9]]
dual:
  t: [0.5]
  lineages: [{site: 0, count: 2}, {site: 3, colour: 1}]
run: {horizon: 1, record_every: 0.5, replicas: 200, depth: 1, grid_size: 7, eq_horizon: 200, n_max: 50}
)";
  const char* subs[] = {"classify",     "simulate-forward", "simulate-dual", "duality-check",
                        "renorm-orbit", "interaction-chain", "profile"};
  for (const char* sub : subs) {
    bool same = true;
    std::size_t files = 0;
    for (const char* run : {"a", "b"}) {
      const std::string out = (root / run).string(), c = cfg.string();
      std::vector<std::string> args{"hfwlab", sub, "--config", c, "--out", out, "--quiet"};
      if (std::string(sub) == "simulate-forward") args.insert(args.end(), {"--replicas", "1"});
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream so, se;
      if (hfwlab::run_cli(int(argv.size()), argv.data(), so, se) != 0) {
        std::string msg = se.str();
        if (!msg.empty() && msg.back() == '\n') msg.pop_back();
        o.note("%s failed: %s", sub, msg.c_str());
        same = false;
      }
    }
    auto slurp = [](const fs::path& f) {
      std::ifstream is(f, std::ios::binary);
      std::ostringstream s;
      s << is.rdbuf();
      return s.str();
    };
    if (fs::exists(root / "a" / sub))
      for (const auto& f : fs::directory_iterator(root / "a" / sub)) {
        ++files;
        same = same && slurp(f.path()) == slurp(root / "b" / sub / f.path().filename());
      }
    same = same && files > 0;
    o.check(same);
    o.note("%-18s %zu files identical %s", sub, files, ok(same));
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"moment relations", moment_relations},
      {"Fisher-Wright closure of F", fw_closure},
      {"universality orbit", universality},
      {"A_n asymptotics table", asymptotics},
      {"clustering verdict truth table", verdict_table},
      {"duality", duality},
      {"forward-mean oracle", mean_oracle},
      {"finite-systems bound", finite_systems},
      {"interaction-chain moments", chain_moments},
      {"wake-up tail exponent", wakeup_tail},
      {"reproducibility", reproducibility}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    const int id = int(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note("error: %s", e.what());
    }
    failed += !o.pass;
    std::printf("criterion %2d %s  %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].name,
                seconds_since(t0));
    for (const auto& l : o.lines) std::printf("    %s\n", l.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
