#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/experiments/scenario.hpp"
#include "fieldsim/sim/trace.hpp"

namespace fieldsim::experiments {

struct SensorCount {
  std::string sensor_id;
  // Unique messages from this sensor collected by any drone.
  std::uint64_t delivered = 0;
  std::uint64_t generated = 0;
  // Receptions of an already-collected message.
  std::uint64_t duplicates = 0;
};

struct CollectionMetrics {
  std::string protocol;
  double altitude_m = 0.0;
  double speed_mps = 0.0;
  std::uint64_t seed = 0;
  int replication = 0;
  std::string scenario_hash;
  // In layout order.
  std::vector<SensorCount> per_sensor;

  std::uint64_t total() const;
  std::uint64_t count(std::string_view sensor_id) const;
};

struct CollectionRun {
  CollectionMetrics metrics;
  sim::EventTrace trace;
};

// One seeded collection flight. Each enabled sensor emits one message per
// traffic interval; drones collect while their mission is in progress
// (stationary drones for the whole run). Deterministic in
// (cfg.master_seed, replication). Throws ConfigInvalid unless the protocol is
// mesh or broadcast.
CollectionRun run_collection_traced(const ScenarioConfig& cfg, int replication);
CollectionMetrics run_collection(const ScenarioConfig& cfg, int replication);

// All cfg.replications runs, executed on independent threads.
std::vector<CollectionMetrics> run_replications(const ScenarioConfig& cfg);

// Per-sensor mean over replications, rounded half away from zero.
CollectionMetrics aggregate(const std::vector<CollectionMetrics>& reps);

nlohmann::json to_json(const CollectionMetrics& m);
CollectionMetrics metrics_from_json(const nlohmann::json& j);

}  // namespace fieldsim::experiments
