#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/experiments/scenario.hpp"
#include "fieldsim/link/throughput.hpp"

namespace fieldsim::experiments {

struct SweepStop {
  double distance_m = 0.0;
  // TCP mode: achieved rate. UDP mode: delivered rate at the offered load.
  double mean_rate_bps = 0.0;
  std::vector<double> rep_rates_bps;
  // UDP mode only.
  std::optional<double> loss_fraction;
  std::optional<bool> stable;
};

struct SweepResult {
  SweepMode mode = SweepMode::kTcp;
  int reps = 0;
  std::vector<SweepStop> stops;
  link::QuadraticFit fit;
};

// Two-vehicle range sweep: one vehicle hovers, the other stops at
// start_m, start_m + step_m, ... up to stop_m and measures the link at each
// stop sweep.reps times. Beyond the pair's effective radio range the link
// carries nothing. A degree-2 fit of mean rate against distance is attached.
// Throws ConfigInvalid unless there are exactly two drones and exactly one of
// them is stationary.
SweepResult run_link_sweep(const ScenarioConfig& cfg);

nlohmann::json to_json(const SweepResult& r);

}  // namespace fieldsim::experiments
