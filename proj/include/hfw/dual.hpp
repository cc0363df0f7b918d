#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hfw/forward.hpp"
#include "hfw/params.hpp"
#include "hfw/rng.hpp"
#include "json.hpp"

namespace hfw {

// Occupation counts of the block-counting process. Role 0 is active,
// role 1+m is dormant colour m.
struct DualConfig {
  int N = 2;
  int levels = 0;
  std::vector<int> counts;  // counts[site * roles() + role]

  DualConfig() = default;
  DualConfig(int N, int levels);
  std::size_t colonies() const { return counts.size() / std::size_t(roles()); }
  int roles() const { return levels + 2; }
  int& active(std::size_t site) { return counts[site * std::size_t(roles())]; }
  int active(std::size_t site) const { return counts[site * std::size_t(roles())]; }
  int& dormant(std::size_t site, int m) { return counts[site * std::size_t(roles()) + 1 + std::size_t(m)]; }
  int dormant(std::size_t site, int m) const {
    return counts[site * std::size_t(roles()) + 1 + std::size_t(m)];
  }
  int total() const;
  bool operator==(const DualConfig& o) const = default;
  bool operator<(const DualConfig& o) const { return counts < o.counts; }
};

enum class DualEvent { migration, coalescence, deactivation, activation };
const char* event_name(DualEvent e);

struct RateEntry {
  DualEvent kind;
  std::size_t site;
  int colour;  // -1 when not applicable
  double rate;
};

// Aggregated rate table: migration per site (targets drawn lazily), coalescence
// per site, deactivation per (site, colour), activation per (site, colour).
std::vector<RateEntry> dual_event_rates(const DualConfig& cfg, const ModelParams& p);

struct EventLogRow {
  double t;
  DualEvent kind;
  std::size_t site;
  int colour;
};

struct DualRun {
  std::vector<EventLogRow> log;
  DualConfig terminal;
};

DualRun simulate_dual(const DualConfig& cfg0, const ModelParams& p, double horizon, Stream& rng,
                      bool keep_log = true);
// CSV `t,event,site,colour`; colour is empty for migration and coalescence.
void write_event_log(std::ostream& os, const std::vector<EventLogRow>& log, int N, int levels);

// prod_eta x_eta^{m_eta} prod_{eta,m} y_{eta,m}^{n_{eta,m}}
double duality_H(const SystemState& z, const DualConfig& l);

// Reachable states from cfg0 and the dense generator on them (row = from).
struct DualGenerator {
  std::vector<DualConfig> states;
  Eigen::MatrixXd Q;
};
DualGenerator build_dual_generator(const DualConfig& cfg0, const ModelParams& p,
                                   std::size_t max_states = 2000);
// Law of the dual at time t started from states[0].
Eigen::VectorXd dual_distribution(const DualGenerator& gen, double t);
double dual_expectation_exact(const ModelParams& p, const SystemState& z, const DualConfig& l,
                              double t, std::size_t max_states = 2000);

struct DualityReport {
  double t = 0;
  MeanSE lhs, rhs;
  std::optional<double> exact;
  double diff = 0;
  double combined_se = 0;
  bool pass = false;  // |lhs - rhs| < 3 combined SE

  std::string to_kv() const;
  nlohmann::json to_json() const;
};

struct DualityOptions {
  double forward_dt = 1e-3;
  bool with_exact = true;
  std::size_t max_states = 2000;
};

DualityReport duality_estimate(const ModelParams& p, const SystemState& z, const DualConfig& l,
                               double t, int replicas, std::uint64_t seed,
                               const DualityOptions& opt = {});
// All configurations and sorted times on one forward run per replica;
// result[i][j] is configuration i at times[j].
std::vector<std::vector<DualityReport>> duality_estimate(const ModelParams& p, const SystemState& z,
                                                         const std::vector<DualConfig>& ls,
                                                         const std::vector<double>& times,
                                                         int replicas, std::uint64_t seed,
                                                         const DualityOptions& opt = {});

struct RenewalSample {
  std::vector<double> sigma;  // active durations
  std::vector<double> tau;    // dormant durations
};
RenewalSample renewal_sample(const ModelParams& p, std::size_t n, Stream& rng);

struct TailFit {
  double gamma = 0;       // Hill estimate on the top fraction
  double gamma_deep = 0;  // same on a ten times smaller top fraction
  std::size_t k = 0;
  bool power_law = false;  // the two estimates agree within 25%
};
TailFit tail_fit(const std::vector<double>& sample, double top_fraction = 0.01);

}  // namespace hfw
