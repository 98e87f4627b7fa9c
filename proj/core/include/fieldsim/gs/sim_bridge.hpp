#pragma once

#include <atomic>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "fieldsim/experiments/scenario.hpp"
#include "fieldsim/gs/ground_station.hpp"
#include "fieldsim/sim/simulator.hpp"

namespace fieldsim::gs {

struct SimBridgeOptions {
  sim::SimTime telemetry_period = sim::kOneSecond;
  // Added to simulation time to form ts_gps.
  std::int64_t gps_epoch_us = 0;
  // Used when a drone's mission has no endurance limit.
  double default_endurance_s = 1200.0;
};

// In-process vehicles driven by the simulator. Commands delivered by the
// service are queued and applied at the next event boundary, so a fixed
// command schedule against advance_to() is reproducible.
class SimBridge {
 public:
  SimBridge(GroundStation& gs, experiments::ScenarioConfig cfg, std::uint64_t seed,
            SimBridgeOptions options = {});
  ~SimBridge();

  SimBridge(const SimBridge&) = delete;
  SimBridge& operator=(const SimBridge&) = delete;

  // Registers every drone with the service. DuplicateVehicleId leaves none
  // of this bridge's drones attached.
  std::vector<std::string> attach();
  void detach();

  // Runs the simulation up to `t`, emitting telemetry into the service.
  void advance_to(sim::SimTime t);
  sim::SimTime now() const;

  // Background pacing: simulation time follows wall time times `speedup`.
  void start(double speedup = 1.0);
  void stop();

  world::Mission mission_of(const std::string& node_id) const;

 private:
  class Link;
  struct Vehicle {
    experiments::DroneSpec spec;
    world::Mission mission;
    world::Trajectory trajectory;
    sim::SimTime mission_start{};
    std::set<std::string> seen_cmds;
    std::optional<std::string> pending_completion;
    std::map<std::string, std::int64_t> counters;
    double endurance_s = 0.0;
  };

  void enqueue(const std::string& node_id, const Command& cmd);
  bool depleted(const std::string& node_id) const;
  void on_event(sim::Event& e);
  void apply_inbox();
  void apply(Vehicle& v, const Command& cmd);
  void retarget(Vehicle& v, std::vector<world::Position> waypoints);
  void emit_telemetry(Vehicle& v);

  GroundStation& gs_;
  experiments::ScenarioConfig cfg_;
  SimBridgeOptions options_;

  mutable std::mutex run_mu_;
  sim::Simulator sim_;
  std::map<std::string, Vehicle> vehicles_;
  std::map<std::string, double> battery_;

  mutable std::mutex inbox_mu_;
  std::deque<std::pair<std::string, Command>> inbox_;
  std::set<std::string> empty_;

  std::vector<std::string> attached_;
  std::atomic<bool> running_{false};
  std::thread pacer_;
};

}  // namespace fieldsim::gs
