#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hfw/dual.hpp"
#include "hfw/forward.hpp"
#include "hfw/params.hpp"
#include "hfw/renorm.hpp"

namespace hfwlab {

struct ExperimentConfig {
  hfw::ModelParams model;

  // run block
  double dt = 0;  // 0: default_dt
  double horizon = 1;
  double record_every = 0;  // 0: record at 0 and horizon only
  std::vector<double> times;
  std::vector<int> record_levels{0};
  bool snapshots = false;
  hfw::ExchangeScheme scheme = hfw::ExchangeScheme::exact;
  int replicas = 100;
  int depth = 3;  // orbit levels, chain depth, profile depth
  int grid_size = 41;
  int n_max = 200;
  double hazard_t_max = 1e300;
  hfw::EquilibriumBudget budget;

  // dual block
  std::vector<double> t{1.0};
  std::optional<hfw::DualConfig> lineages;
  std::size_t max_states = 2000;

  // state block
  std::optional<hfw::SystemState> state;

  std::uint64_t seed = 0;
  std::string out = "out";
};

// Throws hfw::ParameterError with the offending key path.
ExperimentConfig parse_config(const std::string& yaml_text);

std::vector<double> record_times(const ExperimentConfig& c);

}  // namespace hfwlab
