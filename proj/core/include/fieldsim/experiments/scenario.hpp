#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/link/broadcast.hpp"
#include "fieldsim/link/mesh.hpp"
#include "fieldsim/link/throughput.hpp"
#include "fieldsim/radio/propagation.hpp"
#include "fieldsim/world/layout.hpp"
#include "fieldsim/world/mission.hpp"

namespace fieldsim::experiments {

enum class LinkProtocol { kMesh, kBroadcast, kAdhocThroughput };
const char* to_string(LinkProtocol p);

struct DroneSpec {
  std::string id;
  world::Mission mission;
  radio::RadioConfig radio;
};

struct LinkParams {
  link::MeshParams mesh;
  link::BroadcastParams broadcast;
  link::ThroughputModel throughput;
};

// Sensor traffic during collection flights: one message per interval.
struct TrafficParams {
  double message_interval_s = 1.0;
  int payload_bytes = 64;
};

enum class SweepMode { kTcp, kUdp };

struct SweepParams {
  double start_m = 20.0;
  double step_m = 20.0;
  double stop_m = 200.0;
  int reps = 5;
  SweepMode mode = SweepMode::kTcp;
  // Per-repetition multiplicative noise, uniform in [1 - jitter, 1 + jitter].
  double jitter = 0.05;
};

struct ScenarioConfig {
  std::string name;
  world::FieldBounds field;
  world::SensorLayout layout;
  // Class and power shared by all sensors; orientation and height come from
  // each sensor's layout entry.
  radio::RadioConfig sensor_radio;
  std::vector<DroneSpec> drones;
  LinkProtocol protocol = LinkProtocol::kBroadcast;
  LinkParams link_params;
  radio::PropagationModel propagation;
  TrafficParams traffic;
  SweepParams sweep;
  double duration_s = 0.0;
  int replications = 1;
  std::uint64_t master_seed = 0;

  // Throws ConfigInvalid naming the first offending field.
  void validate() const;
  // Digest of the fully resolved configuration.
  std::string hash() const;
  // Radio of a sensor with its own antenna placement applied.
  radio::RadioConfig radio_for(const world::Sensor& sensor) const;
};

// Relative file references ("layout": {"file": ...}, "propagation":
// {"anchors_file": ...}) resolve against `base_dir`.
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);
// Copy of `cfg` with every moving drone flown at `altitude` and/or `speed`.
// The run duration follows the longest resulting mission unless it was set
// longer explicitly. Throws ConfigInvalid if a mission breaks its endurance
// limit.
ScenarioConfig with_flight(const ScenarioConfig& cfg, std::optional<double> altitude,
                           std::optional<double> speed);

// Fully resolved form; scenario_from_json(to_json(cfg)) reproduces cfg.
nlohmann::json to_json(const ScenarioConfig& cfg);

}  // namespace fieldsim::experiments
