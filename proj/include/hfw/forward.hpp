#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hfw/params.hpp"
#include "hfw/rng.hpp"

namespace hfw {

// Full configuration on B_{levels+1}(0): N^{levels+1} colonies, colours 0..levels.
struct SystemState {
  int N = 2;
  int levels = 0;
  double t = 0;
  std::vector<double> x;  // x[i]
  std::vector<double> y;  // y[i * colours + m]

  SystemState() = default;
  SystemState(int N, int levels);
  std::size_t colonies() const { return x.size(); }
  int colours() const { return levels + 1; }
  double& ym(std::size_t i, int m) { return y[i * std::size_t(colours()) + std::size_t(m)]; }
  double ym(std::size_t i, int m) const { return y[i * std::size_t(colours()) + std::size_t(m)]; }
};

// Draws the initial configuration from params.init (iid over colonies).
SystemState initial_state(const ModelParams& p, Stream& rng);
SystemState constant_state(const ModelParams& p, double x, double y);

enum class ExchangeScheme { exact, euler };

struct StepStats {
  std::uint64_t updates = 0;
  std::uint64_t clips = 0;  // colony updates with at least one clip
  double overshoot = 0;     // total clipped distance
  double clip_fraction() const { return updates ? double(clips) / double(updates) : 0.0; }
};

// Rate bounding one step: total migration jump rate plus chi.
double stability_rate(const ModelParams& p);
// dt with dt * (migration + chi + Lip(g)) = 0.1.
double default_dt(const ModelParams& p);

// One time step. Exchange with the seed-bank is split around the migration
// step; migration toward block averages is integrated exactly (the block
// projections commute); noise sqrt(g(x) h) N(0,1) is added last and the
// state is clipped to [0,1]. Near the boundary the noise phase is split into
// sub-steps h = dt/2^j (j <= refine) with sd at most 1/4 of the distance to it.
class ForwardStepper {
 public:
  ForwardStepper(const ModelParams& p, double dt, ExchangeScheme scheme = ExchangeScheme::exact,
                 int refine = 10);
  void step(SystemState& s, Stream& rng, StepStats* stats = nullptr) const;
  double dt() const { return dt_; }

 private:
  void exchange(SystemState& s) const;
  void migrate(SystemState& s) const;

  ModelParams p_;
  double dt_;
  ExchangeScheme scheme_;
  int refine_;
  std::vector<double> keep_;   // e^{-w_k dt} per level k = 1..L
  std::vector<double> relax_;  // exact half-step relaxation factor per colour
  std::vector<double> flux_;   // Euler half-step flux per colour
  mutable std::vector<double> buf_;
};

void step(SystemState& s, double dt, const ModelParams& p, Stream& rng, StepStats* stats = nullptr);

struct BlockAverage {
  double x = 0;
  std::vector<double> y;  // y_{m,l}, m = 0..levels
};
// Mean over B_l(0), l = 0..levels+1.
BlockAverage block_average(const SystemState& s, int l);

struct Estimators {
  double theta_bar = 0;  // level-l estimator
  double theta_x = 0;
  std::vector<double> theta_y;
};
Estimators estimators(const SystemState& s, const ModelParams& p, int l);
// Population-wide (x + sum K_m y_m)/(1 + sum K_m), averaged over all colonies.
double grand_mean(const SystemState& s, const ModelParams& p);

struct RecordPlan {
  std::vector<double> times;  // sorted, >= 0
  std::vector<int> levels{0};
  bool snapshots = false;
};

struct TrajectoryRecord {
  struct Row {
    double t;
    int level;
    std::string component;
    double value;
  };
  std::vector<Row> rows;
  std::vector<SystemState> snapshots;
  StepStats stats;
  bool clip_flagged = false;  // clip fraction above 1%

  // CSV `t,level,component,value`
  void write_csv(std::ostream& os) const;
  // CSV `t,address,x,y0,...,yk`
  void write_snapshots(std::ostream& os) const;
  double value(double t, int level, const std::string& component) const;
};

struct SimOptions {
  double dt = 0;  // 0: default_dt
  ExchangeScheme scheme = ExchangeScheme::exact;
  int refine = 10;  // 0 gives plain Euler-Maruyama noise
};

TrajectoryRecord simulate(const ModelParams& p, const SystemState& init, const RecordPlan& plan,
                          Stream& rng, const SimOptions& opt = {});
TrajectoryRecord simulate(const ModelParams& p, const RecordPlan& plan, Stream& rng,
                          const SimOptions& opt = {});

struct MeanSE {
  double mean = 0;
  double se = 0;
};

// Replica means of every (t, level, component) entry, replicas keyed by
// (seed, task, replica).
struct EnsembleSummary {
  std::vector<TrajectoryRecord::Row> rows;  // value = mean
  std::vector<double> se;
  StepStats stats;
  MeanSE get(double t, int level, const std::string& component) const;
};
EnsembleSummary simulate_ensemble(const ModelParams& p, const RecordPlan& plan, int replicas,
                                  std::uint64_t seed, const std::string& task,
                                  const SimOptions& opt = {});

// ---- single-colony McKean-Vlasov pair ----
// Closed-form means: theta + K/(1+K) (tx - ty) e^{-(K+1)e t}, and the y analogue.
struct PairMeans {
  double x, y;
};
PairMeans mv_mean(double theta_x, double theta_y, double K, double e, double t);

struct McKeanVlasovResult {
  std::vector<double> times;
  std::vector<MeanSE> x, y;
  StepStats stats;
};
// dx = c(m(t) - x) + K e (y - x) + sqrt(g(x)) dw, dy = e (x - y), m(t) the
// closed-form mean; replicas started at (theta_x, theta_y).
McKeanVlasovResult simulate_mckean_vlasov(double c, double K, double e, const DiffusionFn& g,
                                          double theta_x, double theta_y,
                                          const std::vector<double>& times, int replicas,
                                          double dt, std::uint64_t seed);

// Expected state at time t from a deterministic initial state, by
// uniformization of the single-lineage generator.
SystemState first_moment_oracle(const ModelParams& p, const SystemState& z, double t,
                                std::size_t max_states = 10000);

}  // namespace hfw
