#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <yaml-cpp/yaml.h>

#include "hfw/error.hpp"

namespace hfwlab {

using hfw::ParameterError;

namespace {

void check_keys(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed) {
  if (!n.IsMap()) throw ParameterError("config: '" + path + "' must be a mapping");
  for (const auto& kv : n) {
    const auto k = kv.first.as<std::string>();
    if (!allowed.count(k)) throw ParameterError("config: unknown key '" + (path.empty() ? k : path + "." + k) + "'");
  }
}

template <class T>
T get(const YAML::Node& n, const std::string& key, const std::string& path, T fallback) {
  const auto v = n[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ParameterError("config: bad value for '" + path + "." + key + "'");
  }
}

template <class T>
T need(const YAML::Node& n, const std::string& key, const std::string& path) {
  if (!n[key]) throw ParameterError("config: missing '" + path + "." + key + "'");
  return get<T>(n, key, path, T{});
}

hfw::DiffusionFn parse_g(const YAML::Node& n) {
  if (!n) return hfw::DiffusionFn::fisher_wright(1.0);
  check_keys(n, "model.g", {"kind", "d", "p", "file"});
  const auto kind = get<std::string>(n, "kind", "model.g", "fisher_wright");
  const double d = get<double>(n, "d", "model.g", 1.0);
  if (kind == "fisher_wright") return hfw::DiffusionFn::fisher_wright(d);
  if (kind == "power") return hfw::DiffusionFn::power(d, need<double>(n, "p", "model.g"));
  if (kind == "grid") {
    const auto file = need<std::string>(n, "file", "model.g");
    std::ifstream is(file);
    if (!is) throw ParameterError("config: cannot read grid file '" + file + "'");
    auto grid = hfw::read_grid_csv(is);
    const double lip = grid.max_slope();
    return hfw::DiffusionFn::tabulated(std::move(grid), lip);
  }
  throw ParameterError("config: model.g.kind must be fisher_wright, power or grid");
}

hfw::InitSpec parse_init(const YAML::Node& n) {
  hfw::InitSpec s;
  if (!n) return s;
  check_keys(n, "init", {"law", "theta_x", "theta_y", "concentration"});
  const auto law = get<std::string>(n, "law", "init", "constant");
  using L = hfw::InitSpec::Law;
  bool known = false;
  for (L l : {L::constant, L::beta, L::two_point})
    if (law == hfw::InitSpec::law_name(l)) {
      s.law = l;
      known = true;
    }
  if (!known) throw ParameterError("config: init.law must be constant, beta or two_point");
  s.theta_x = get<double>(n, "theta_x", "init", s.theta_x);
  if (n["theta_y"]) {
    if (n["theta_y"].IsSequence())
      s.theta_y = get<std::vector<double>>(n, "theta_y", "init", {});
    else
      s.theta_y = {get<double>(n, "theta_y", "init", 0.5)};
    if (s.theta_y.empty()) throw ParameterError("config: init.theta_y must not be empty");
  }
  s.concentration = get<double>(n, "concentration", "init", s.concentration);
  return s;
}

hfw::ModelParams parse_model(const YAML::Node& n, const hfw::InitSpec& init) {
  if (!n) throw ParameterError("config: missing 'model' block");
  check_keys(n, "model", {"N", "levels", "family", "K", "e", "c", "alpha", "beta", "phi", "A", "B",
                          "F", "shift", "g"});
  const int N = need<int>(n, "N", "model");
  const int levels = need<int>(n, "levels", "model");
  const auto family = need<std::string>(n, "family", "model");
  const auto g = parse_g(n["g"]);
  if (family == "exponential") {
    for (const char* k : {"alpha", "beta", "phi", "A", "B", "F", "shift"})
      if (n[k]) throw ParameterError(std::string("config: model.") + k + " is not an exponential parameter");
    const auto f = hfw::Family::exponential(need<double>(n, "K", "model"), need<double>(n, "e", "model"),
                                            need<double>(n, "c", "model"));
    return hfw::ModelParams::from_family(f, N, levels, g, init);
  }
  if (family == "polynomial") {
    for (const char* k : {"K", "e", "c"})
      if (n[k]) throw ParameterError(std::string("config: model.") + k + " is not a polynomial parameter");
    const auto f = hfw::Family::polynomial(
        need<double>(n, "alpha", "model"), need<double>(n, "beta", "model"), need<double>(n, "phi", "model"),
        get<double>(n, "A", "model", 1), get<double>(n, "B", "model", 1), get<double>(n, "F", "model", 1),
        get<double>(n, "shift", "model", 1));
    return hfw::ModelParams::from_family(f, N, levels, g, init);
  }
  if (family == "sequences") {
    for (const char* k : {"alpha", "beta", "phi", "A", "B", "F", "shift"})
      if (n[k]) throw ParameterError(std::string("config: model.") + k + " is not a sequence parameter");
    auto seq = [&](const char* k) { return need<std::vector<double>>(n, k, "model"); };
    auto p = hfw::ModelParams::from_sequences(N, seq("c"), seq("e"), seq("K"), g, init);
    if (p.levels != levels) throw ParameterError("config: model.levels does not match the sequence lengths");
    return p;
  }
  throw ParameterError("config: model.family must be exponential, polynomial or sequences");
}

void parse_run(const YAML::Node& n, ExperimentConfig& c) {
  if (!n) return;
  check_keys(n, "run", {"dt", "horizon", "record_every", "times", "record_levels", "snapshots", "scheme",
                        "replicas", "depth", "grid_size", "n_max", "hazard_t_max", "kappa", "burn_in",
                        "eq_horizon", "batches", "refine"});
  c.dt = get<double>(n, "dt", "run", c.dt);
  c.horizon = get<double>(n, "horizon", "run", c.horizon);
  c.record_every = get<double>(n, "record_every", "run", c.record_every);
  c.times = get<std::vector<double>>(n, "times", "run", c.times);
  c.record_levels = get<std::vector<int>>(n, "record_levels", "run", c.record_levels);
  c.snapshots = get<bool>(n, "snapshots", "run", c.snapshots);
  const auto scheme = get<std::string>(n, "scheme", "run", "exact");
  if (scheme == "exact")
    c.scheme = hfw::ExchangeScheme::exact;
  else if (scheme == "euler")
    c.scheme = hfw::ExchangeScheme::euler;
  else
    throw ParameterError("config: run.scheme must be exact or euler");
  c.replicas = get<int>(n, "replicas", "run", c.replicas);
  c.depth = get<int>(n, "depth", "run", c.depth);
  c.grid_size = get<int>(n, "grid_size", "run", c.grid_size);
  c.n_max = get<int>(n, "n_max", "run", c.n_max);
  c.hazard_t_max = get<double>(n, "hazard_t_max", "run", c.hazard_t_max);
  auto& b = c.budget;
  b.kappa = get<double>(n, "kappa", "run", b.kappa);
  b.burn_in = get<double>(n, "burn_in", "run", b.burn_in);
  b.horizon = get<double>(n, "eq_horizon", "run", b.horizon);
  b.batches = get<int>(n, "batches", "run", b.batches);
  b.refine = get<int>(n, "refine", "run", b.refine);
}

void parse_dual(const YAML::Node& n, ExperimentConfig& c) {
  if (!n) return;
  check_keys(n, "dual", {"t", "lineages", "max_states"});
  if (n["t"]) c.t = n["t"].IsSequence() ? get<std::vector<double>>(n, "t", "dual", {})
                                       : std::vector<double>{get<double>(n, "t", "dual", 1.0)};
  c.max_states = get<std::size_t>(n, "max_states", "dual", c.max_states);
  const auto ls = n["lineages"];
  if (!ls) return;
  if (!ls.IsSequence()) throw ParameterError("config: dual.lineages must be a list");
  hfw::DualConfig l(c.model.N, c.model.levels);
  for (const auto& e : ls) {
    check_keys(e, "dual.lineages[]", {"site", "colour", "count"});
    const auto site = need<std::size_t>(e, "site", "dual.lineages[]");
    const int count = get<int>(e, "count", "dual.lineages[]", 1);
    if (site >= l.colonies()) throw ParameterError("config: dual.lineages[].site outside the colonies");
    if (count < 0) throw ParameterError("config: dual.lineages[].count must be >= 0");
    if (e["colour"]) {
      const int m = get<int>(e, "colour", "dual.lineages[]", 0);
      if (m < 0 || m > c.model.levels) throw ParameterError("config: dual.lineages[].colour outside 0..levels");
      l.dormant(site, m) += count;
    } else {
      l.active(site) += count;
    }
  }
  c.lineages = l;
}

void parse_state(const YAML::Node& n, ExperimentConfig& c) {
  if (!n) return;
  check_keys(n, "state", {"x", "y"});
  hfw::SystemState s(c.model.N, c.model.levels);
  const auto x = need<std::vector<double>>(n, "x", "state");
  if (x.size() != s.colonies()) throw ParameterError("config: state.x needs one value per colony");
  s.x = x;
  const auto y = n["y"];
  if (!y || !y.IsSequence() || y.size() != s.colonies())
    throw ParameterError("config: state.y needs one entry per colony");
  for (std::size_t i = 0; i < s.colonies(); ++i) {
    std::vector<double> v;
    try {
      v = y[i].IsSequence() ? y[i].as<std::vector<double>>() : std::vector<double>{y[i].as<double>()};
    } catch (const YAML::Exception&) {
      throw ParameterError("config: bad value in state.y");
    }
    if (v.size() != 1 && int(v.size()) != s.colours())
      throw ParameterError("config: state.y entries need 1 or levels+1 values");
    for (int m = 0; m < s.colours(); ++m) s.ym(i, m) = v[v.size() == 1 ? 0 : std::size_t(m)];
  }
  auto in01 = [](double v) { return v >= 0 && v <= 1; };
  if (!std::all_of(s.x.begin(), s.x.end(), in01) || !std::all_of(s.y.begin(), s.y.end(), in01))
    throw ParameterError("config: state values must lie in [0,1]");
  c.state = s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  check_keys(root, "", {"seed", "out", "model", "init", "run", "dual", "state"});
  ExperimentConfig c;
  c.seed = get<std::uint64_t>(root, "seed", "", 0);
  c.out = get<std::string>(root, "out", "", c.out);
  c.model = parse_model(root["model"], parse_init(root["init"]));
  c.model.validate();
  parse_run(root["run"], c);
  parse_dual(root["dual"], c);
  parse_state(root["state"], c);
  hfw::require(c.replicas >= 1, "config: run.replicas must be >= 1");
  hfw::require(c.horizon >= 0 && c.record_every >= 0 && c.dt >= 0, "config: run times must be >= 0");
  hfw::require(c.depth >= 0, "config: run.depth must be >= 0");
  hfw::require(c.grid_size >= 1, "config: run.grid_size must be >= 1");
  hfw::require(c.n_max >= 1, "config: run.n_max must be >= 1");
  for (double t : c.t) hfw::require(t >= 0, "config: dual.t must be >= 0");
  for (int l : c.record_levels)
    hfw::require(l >= 0 && l <= c.model.levels + 1, "config: run.record_levels outside 0..levels+1");
  return c;
}

std::vector<double> record_times(const ExperimentConfig& c) {
  if (!c.times.empty()) {
    auto t = c.times;
    std::sort(t.begin(), t.end());
    return t;
  }
  std::vector<double> t{0.0};
  if (c.record_every > 0)
    for (long i = 1; double(i) * c.record_every < c.horizon; ++i) t.push_back(double(i) * c.record_every);
  if (c.horizon > 0) t.push_back(c.horizon);
  return t;
}

}  // namespace hfwlab
