#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "config.hpp"
#include "hfw/error.hpp"
#include "hfw/io.hpp"

namespace hfwlab {

using nlohmann::json;

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

// Everything a subcommand produces; nothing touches the disk until it is complete.
struct RunOutput {
  std::map<std::string, std::string> files;
  json summary = json::object();
  std::string report;  // stdout text
};

const char* module_of(const std::string& sub) {
  if (sub == "classify") return "params";
  if (sub == "simulate-forward") return "forward";
  if (sub == "simulate-dual" || sub == "duality-check") return "dual";
  return "renorm";
}

hfw::SystemState start_state(const ExperimentConfig& c) {
  if (c.state) return *c.state;
  hfw::Stream rng = hfw::make_stream(c.seed, "initial-state");
  return hfw::initial_state(c.model, rng);
}

const hfw::DualConfig& need_lineages(const ExperimentConfig& c) {
  if (!c.lineages || c.lineages->total() == 0)
    throw hfw::ParameterError("config: dual.lineages must hold at least one lineage");
  return *c.lineages;
}

// Coefficients up to n levels: families are re-expanded, explicit sequences
// keep their stored length.
hfw::ModelParams expanded(const hfw::ModelParams& p, int n) {
  if (p.family.kind == hfw::FamilyKind::generic) return p;
  return hfw::ModelParams::from_family(p.family, p.N, std::max(p.levels, n - 1), p.g, p.init);
}

hfw::ClusteringCoefficients coefficients(const hfw::ModelParams& p, int n_max) {
  const auto q = expanded(p, n_max);
  return hfw::compute_A(q, hfw::derive(q), std::min(n_max, q.levels + 1));
}

RunOutput cmd_classify(const ExperimentConfig& c) {
  RunOutput o;
  const auto& p = c.model;
  const auto r = hfw::classify_regime(p);
  json j = r.to_json();
  std::ostringstream rep;
  rep << r.to_kv();
  try {
    const auto v = hfw::clustering_verdict(p, r);
    j["verdict"] = hfw::verdict_name(v);
  } catch (const hfw::UnsupportedError& e) {
    j["verdict"] = "unavailable";
    j["verdict_note"] = e.what();
  }
  rep << "verdict=" << j["verdict"].get<std::string>() << '\n';
  if (r.rho_infinite.value_or(false)) {
    const auto h = hfw::hazard_diagnostic(expanded(p, c.n_max), r, c.hazard_t_max);
    j["hazard"] = {{"verdict", hfw::hazard_name(h.verdict)}, {"slope", h.slope},   {"slope_se", h.slope_se},
                   {"windows", h.windows},                   {"scale", h.scale},   {"note", h.note}};
    rep << "hazard=" << hfw::hazard_name(h.verdict) << '\n';
  }
  const auto cc = coefficients(p, c.n_max);
  std::ostringstream a;
  hfw::write_A_csv(a, cc);
  o.files["A.csv"] = a.str();
  j["asymptotic_class"] = cc.asym.id;
  j["A_n_max"] = cc.A(cc.n_max());
  o.summary = j;
  o.report = rep.str();
  return o;
}

RunOutput cmd_simulate_forward(const ExperimentConfig& c) {
  RunOutput o;
  hfw::RecordPlan plan;
  plan.times = record_times(c);
  plan.levels = c.record_levels;
  plan.snapshots = c.snapshots && c.replicas == 1;
  hfw::SimOptions opt;
  opt.dt = c.dt;
  opt.scheme = c.scheme;
  opt.refine = c.budget.refine;
  hfw::StepStats stats;
  if (c.replicas == 1) {
    hfw::Stream rng = hfw::make_stream(c.seed, "simulate-forward");
    const auto init = c.state ? *c.state : hfw::initial_state(c.model, rng);
    const auto tr = hfw::simulate(c.model, init, plan, rng, opt);
    std::ostringstream os;
    tr.write_csv(os);
    o.files["trajectory.csv"] = os.str();
    if (plan.snapshots) {
      std::ostringstream ss;
      tr.write_snapshots(ss);
      o.files["snapshots.csv"] = ss.str();
    }
    stats = tr.stats;
  } else {
    if (c.state) throw hfw::ParameterError("config: a state block needs run.replicas = 1");
    const auto en = hfw::simulate_ensemble(c.model, plan, c.replicas, c.seed, "simulate-forward", opt);
    std::ostringstream os;
    os << "t,level,component,mean,se\n";
    for (std::size_t i = 0; i < en.rows.size(); ++i)
      hfw::csv_row(os, en.rows[i].t, en.rows[i].level, en.rows[i].component, en.rows[i].value, en.se[i]);
    o.files["ensemble.csv"] = os.str();
    stats = en.stats;
  }
  const double dt = c.dt > 0 ? c.dt : hfw::default_dt(c.model);
  o.summary = {{"replicas", c.replicas},
               {"dt", dt},
               {"updates", stats.updates},
               {"clips", stats.clips},
               {"clip_fraction", stats.clip_fraction()},
               {"overshoot", stats.overshoot},
               {"clip_flagged", stats.clip_fraction() > 0.01}};
  std::ostringstream rep;
  rep << "replicas=" << c.replicas << "\ndt=" << hfw::num(dt) << "\nclip_fraction=" << hfw::num(stats.clip_fraction())
      << '\n';
  o.report = rep.str();
  return o;
}

RunOutput cmd_simulate_dual(const ExperimentConfig& c) {
  RunOutput o;
  const auto& l = need_lineages(c);
  double horizon = 0;
  for (double t : c.t) horizon = std::max(horizon, t);
  std::ostringstream term;
  term << "replica,lineages,active,dormant,events\n";
  double mean = 0;
  for (int r = 0; r < c.replicas; ++r) {
    hfw::Stream rng = hfw::make_stream(c.seed, "simulate-dual", std::uint64_t(r));
    const auto run = hfw::simulate_dual(l, c.model, horizon, rng, true);
    if (r == 0) {
      std::ostringstream ev;
      hfw::write_event_log(ev, run.log, c.model.N, c.model.levels);
      o.files["events.csv"] = ev.str();
    }
    int active = 0;
    for (std::size_t s = 0; s < run.terminal.colonies(); ++s) active += run.terminal.active(s);
    const int total = run.terminal.total();
    hfw::csv_row(term, r, total, active, total - active, run.log.size());
    mean += double(total) / c.replicas;
  }
  o.files["terminal.csv"] = term.str();
  o.summary = {{"horizon", horizon}, {"replicas", c.replicas}, {"initial_lineages", l.total()},
               {"mean_lineages", mean}};
  o.report = "horizon=" + hfw::num(horizon) + "\nmean_lineages=" + hfw::num(mean) + "\n";
  return o;
}

RunOutput cmd_duality_check(const ExperimentConfig& c) {
  RunOutput o;
  const auto& l = need_lineages(c);
  const auto z = start_state(c);
  hfw::DualityOptions opt;
  if (c.dt > 0) opt.forward_dt = c.dt;
  opt.max_states = c.max_states;
  std::string exact_note = "generator exponentiation";
  try {
    hfw::build_dual_generator(l, c.model, c.max_states);
  } catch (const hfw::SizeError& e) {
    opt.with_exact = false;
    exact_note = std::string("skipped: ") + e.what();
  }
  auto times = c.t;
  std::sort(times.begin(), times.end());
  const auto res = hfw::duality_estimate(c.model, z, {l}, times, c.replicas, c.seed, opt);
  std::ostringstream os, rep;
  os << "t,lhs,lhs_se,rhs,rhs_se,exact,diff,combined_se,pass\n";
  json list = json::array();
  bool all = true;
  for (const auto& r : res.front()) {
    hfw::csv_row(os, r.t, r.lhs.mean, r.lhs.se, r.rhs.mean, r.rhs.se, r.exact ? hfw::num(*r.exact) : std::string(),
                 r.diff, r.combined_se, r.pass ? "true" : "false");
    list.push_back(r.to_json());
    rep << r.to_kv();
    all = all && r.pass;
  }
  o.files["duality.csv"] = os.str();
  o.summary = {{"replicas", c.replicas}, {"reports", list}, {"pass", all}, {"exact", exact_note}};
  rep << "all_pass=" << (all ? "true" : "false") << '\n';
  o.report = rep.str();
  return o;
}

RunOutput cmd_renorm_orbit(const ExperimentConfig& c) {
  RunOutput o;
  const auto& p = c.model;
  const auto d = hfw::derive(p);
  const auto nodes = hfw::GridFunction::chebyshev_nodes(c.grid_size);
  const auto rep = hfw::iterate_F_scaled(p.g, p, d, std::max(1, c.depth), c.budget, c.seed, nodes);
  std::ostringstream a, g;
  rep.write_csv(a);
  o.files["orbit.csv"] = a.str();
  // the Fisher-Wright orbit is known: F^(n) g = d_n g_FW
  std::vector<double> dn;
  if (p.g.is_fisher_wright()) {
    const auto cc = hfw::compute_A(p, d, int(rep.levels.size()) - 1);
    dn = hfw::fw_recursion_oracle(p.g.d(), int(rep.levels.size()) - 1, cc);
  }
  g << "level,theta,scaled,scaled_se,oracle\n";
  double worst = 0;
  for (const auto& L : rep.levels) {
    const double s = L.level == 0 ? 1.0 : L.A_n;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double th = nodes[i], v = s * L.g(th), se = s * L.se[i];
      std::string oracle;
      if (!dn.empty()) {
        const double w = s * dn[std::size_t(L.level)] * th * (1 - th);
        oracle = hfw::num(w);
        if (se > 0) worst = std::max(worst, std::abs(v - w) / se);
      }
      hfw::csv_row(g, L.level, th, v, se, oracle);
    }
  }
  o.files["orbit_grid.csv"] = g.str();
  json levels = json::array();
  bool flagged = false;
  for (const auto& L : rep.levels) {
    levels.push_back({{"level", L.level}, {"A_n", L.A_n}, {"sup_distance", L.sup_distance}, {"flagged", L.flagged}});
    flagged = flagged || L.flagged;
  }
  o.summary = {{"levels", levels}, {"flagged", flagged}};
  if (!dn.empty()) {
    o.summary["max_oracle_z"] = worst;
    o.summary["oracle_pass"] = worst < 3;
  }
  std::ostringstream r;
  r << "levels=" << rep.levels.size() - 1 << "\nsup_distance=" << hfw::num(rep.levels.back().sup_distance) << '\n';
  if (!dn.empty()) r << "max_oracle_z=" << hfw::num(worst) << '\n';
  o.report = r.str();
  return o;
}

RunOutput cmd_interaction_chain(const ExperimentConfig& c) {
  RunOutput o;
  const auto& p = c.model;
  const auto d = hfw::derive(p);
  const int k = c.depth;
  std::vector<hfw::DiffusionFn> orbit;
  if (p.g.is_fisher_wright()) {
    const auto cc = hfw::compute_A(p, d, k);
    for (double v : hfw::fw_recursion_oracle(p.g.d(), k, cc)) orbit.push_back(hfw::DiffusionFn::fisher_wright(v));
  } else {
    orbit.push_back(p.g);
    if (k > 0) {
      const auto rep = hfw::iterate_F_scaled(p.g, p, d, k, c.budget, c.seed,
                                             hfw::GridFunction::chebyshev_nodes(c.grid_size));
      for (int l = 1; l <= k; ++l) orbit.push_back(rep.levels[std::size_t(l)].g);
    }
  }
  const auto cs = hfw::sample_interaction_chain(k, p, d, orbit, c.replicas, c.budget, c.seed);
  std::ostringstream ch, sm;
  ch << "level,replica,x,y\n";
  sm << "level,mean,mean_se,variance,variance_se\n";
  for (int m = 0; m <= k; ++m) {
    for (std::size_t r = 0; r < cs.x[std::size_t(m)].size(); ++r)
      hfw::csv_row(ch, m, r, cs.x[std::size_t(m)][r], cs.y[std::size_t(m)][r]);
    const auto mu = cs.mean(m), var = cs.variance(m);
    hfw::csv_row(sm, m, mu.mean, mu.se, var.mean, var.se);
  }
  o.files["chain.csv"] = ch.str();
  o.files["chain_summary.csv"] = sm.str();
  const auto hi = cs.fraction_above(0.9), lo = cs.fraction_below(0.1);
  o.summary = {{"depth", k},
               {"start", cs.start},
               {"replicas", c.replicas},
               {"fraction_above_0.9", {{"mean", hi.mean}, {"se", hi.se}}},
               {"fraction_below_0.1", {{"mean", lo.mean}, {"se", lo.se}}}};
  o.report = "start=" + hfw::num(cs.start) + "\nmean=" + hfw::num(cs.mean(0).mean) + "\n";
  return o;
}

RunOutput cmd_profile(const ExperimentConfig& c) {
  RunOutput o;
  const auto cc = coefficients(c.model, c.depth + 1);
  const auto f = hfw::volatility_profile(c.depth, cc);
  std::ostringstream os;
  os << "l,f\n";
  for (std::size_t l = 0; l < f.size(); ++l) hfw::csv_row(os, l, f[l]);
  o.files["profile.csv"] = os.str();
  const char* cls = c.depth >= 1 ? hfw::profile_name(hfw::classify_profile(f)) : "unavailable";
  o.summary = {{"depth", c.depth}, {"class", cls}};
  o.report = std::string("class=") + cls + "\n";
  return o;
}

void write_outputs(const std::string& dir, const std::string& sub, const ExperimentConfig& c,
                   const std::string& config_text, const std::vector<std::string>& args, RunOutput& o) {
  namespace fs = std::filesystem;
  o.summary["subcommand"] = sub;
  o.files["summary.json"] = o.summary.dump(2) + "\n";
  fs::create_directories(dir);
  json files = json::object();
  for (const auto& [name, data] : o.files) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    f << data;
    if (!f) throw hfw::Error("cannot write " + name);
    files[name] = sha256_hex(data);
  }
  const json manifest = {{"subcommand", sub},         {"version", kVersion},
                         {"seed", c.seed},            {"config_sha256", sha256_hex(config_text)},
                         {"arguments", args},         {"files", files}};
  std::ofstream m(fs::path(dir) / "manifest.json", std::ios::binary);
  m << manifest.dump(2) << '\n';
  if (!m) throw hfw::Error("cannot write manifest.json");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical Fisher-Wright experiments with seed-bank"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  struct Flags {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas, levels;
    std::vector<double> t;
    bool quiet = false;
  } fl;

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"classify", "regime, clustering verdict and A_n table"},
      {"simulate-forward", "forward system trajectories"},
      {"simulate-dual", "dual lineage process"},
      {"duality-check", "both sides of the duality relation"},
      {"renorm-orbit", "iterated renormalisation map"},
      {"interaction-chain", "multiscale interaction chain"},
      {"profile", "volatility profile"}};
  for (const auto& [name, help] : subs) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", fl.config, "YAML configuration")->required();
    s->add_option("--seed", fl.seed, "seed (overrides the config)");
    s->add_option("--out", fl.out, "output directory (overrides the config)");
    s->add_option("--replicas", fl.replicas, "replicas (overrides run.replicas)");
    s->add_flag("--quiet", fl.quiet, "no report on stdout");
    if (name == "simulate-dual" || name == "duality-check")
      s->add_option("--t", fl.t, "time horizon(s) (overrides dual.t)");
    if (name == "renorm-orbit" || name == "interaction-chain" || name == "profile")
      s->add_option("--levels", fl.levels, "depth (overrides run.depth)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  // recorded in the manifest; the output location is not part of the inputs
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out") {
      ++i;
      continue;
    }
    if (a.rfind("--out=", 0) == 0) continue;
    args.push_back(a);
  }

  std::string stage = "cli";
  try {
    std::ifstream f(fl.config, std::ios::binary);
    if (!f) throw hfw::ParameterError("cannot read config '" + fl.config + "'");
    std::ostringstream text;
    text << f.rdbuf();
    auto c = parse_config(text.str());
    if (fl.seed) c.seed = *fl.seed;
    if (!fl.out.empty()) c.out = fl.out;
    if (fl.replicas) {
      hfw::require(*fl.replicas >= 1, "--replicas must be >= 1");
      c.replicas = *fl.replicas;
    }
    if (fl.levels) {
      hfw::require(*fl.levels >= 0, "--levels must be >= 0");
      c.depth = *fl.levels;
    }
    if (!fl.t.empty()) {
      for (double t : fl.t) hfw::require(t >= 0, "--t must be >= 0");
      c.t = fl.t;
    }

    stage = module_of(sub);
    RunOutput o;
    if (sub == "classify") o = cmd_classify(c);
    else if (sub == "simulate-forward") o = cmd_simulate_forward(c);
    else if (sub == "simulate-dual") o = cmd_simulate_dual(c);
    else if (sub == "duality-check") o = cmd_duality_check(c);
    else if (sub == "renorm-orbit") o = cmd_renorm_orbit(c);
    else if (sub == "interaction-chain") o = cmd_interaction_chain(c);
    else o = cmd_profile(c);

    stage = "cli";
    write_outputs((std::filesystem::path(c.out) / sub).string(), sub, c, text.str(), args, o);
    if (!fl.quiet) out << o.report;
    return 0;
  } catch (const std::exception& e) {
    err << "hfwlab " << sub << ": " << stage << ": " << e.what() << '\n';
    return 2;
  }
}

}  // namespace hfwlab
