#include "fieldsim/gs/sim_bridge.hpp"

#include <algorithm>
#include <chrono>

#include "fieldsim/errors.hpp"

namespace fieldsim::gs {

class SimBridge::Link : public VehicleLink {
 public:
  Link(SimBridge& bridge, std::string node_id) : bridge_(bridge), node_id_(std::move(node_id)) {}

  void deliver(const Command& cmd) override {
    if (bridge_.depleted(node_id_)) throw VehicleUnreachable(node_id_ + ": battery depleted");
    bridge_.enqueue(node_id_, cmd);
  }

 private:
  SimBridge& bridge_;
  std::string node_id_;
};

SimBridge::SimBridge(GroundStation& gs, experiments::ScenarioConfig cfg, std::uint64_t seed,
                     SimBridgeOptions options)
    : gs_(gs), cfg_(std::move(cfg)), options_(options), sim_(seed, cfg_.hash()) {
  for (const auto& d : cfg_.drones) {
    Vehicle v{d, d.mission, world::Trajectory(d.mission), {}, {}, {}, {}, 0.0};
    v.endurance_s = d.mission.endurance_limit_s.value_or(options_.default_endurance_s);
    vehicles_.emplace(d.id, std::move(v));
    battery_[d.id] = 1.0;
    sim_.schedule(sim::SimTime{}, d.id, sim::EventKind::kCustom, {{"telemetry", true}});
  }
  sim_.set_handler([this](sim::Event& e, sim::Simulator&) { on_event(e); });
}

SimBridge::~SimBridge() {
  stop();
  detach();
}

std::vector<std::string> SimBridge::attach() {
  std::vector<std::string> done;
  try {
    for (const auto& [id, v] : vehicles_) {
      gs_.attach_vehicle(id, std::make_shared<Link>(*this, id));
      done.push_back(id);
    }
  } catch (const DuplicateVehicleId&) {
    for (const auto& id : done) gs_.detach_vehicle(id);
    throw;
  }
  attached_ = done;
  return done;
}

void SimBridge::detach() {
  for (const auto& id : attached_) gs_.detach_vehicle(id);
  attached_.clear();
}

void SimBridge::enqueue(const std::string& node_id, const Command& cmd) {
  std::lock_guard lock(inbox_mu_);
  inbox_.emplace_back(node_id, cmd);
}

bool SimBridge::depleted(const std::string& node_id) const {
  std::lock_guard lock(inbox_mu_);
  return empty_.contains(node_id);
}

void SimBridge::advance_to(sim::SimTime t) {
  std::lock_guard lock(run_mu_);
  if (t > sim_.now()) sim_.run_until(t);
}

sim::SimTime SimBridge::now() const {
  std::lock_guard lock(run_mu_);
  return sim_.now();
}

world::Mission SimBridge::mission_of(const std::string& node_id) const {
  std::lock_guard lock(run_mu_);
  return vehicles_.at(node_id).mission;
}

void SimBridge::start(double speedup) {
  if (running_.exchange(true)) return;
  pacer_ = std::thread([this, speedup] {
    const auto wall0 = std::chrono::steady_clock::now();
    const auto sim0 = now();
    while (running_) {
      const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
      advance_to(sim0 + sim::SimTime::from_seconds(elapsed * speedup));
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });
}

void SimBridge::stop() {
  running_ = false;
  if (pacer_.joinable()) pacer_.join();
}

void SimBridge::apply_inbox() {
  std::deque<std::pair<std::string, Command>> batch;
  {
    std::lock_guard lock(inbox_mu_);
    batch.swap(inbox_);
  }
  for (const auto& [id, cmd] : batch) {
    auto it = vehicles_.find(id);
    if (it == vehicles_.end()) continue;
    if (!it->second.seen_cmds.insert(cmd.cmd_id).second) continue;
    apply(it->second, cmd);
  }
}

void SimBridge::retarget(Vehicle& v, std::vector<world::Position> waypoints) {
  const auto here = v.trajectory.position_at(sim_.now() - v.mission_start);
  world::Mission m;
  m.speed = v.spec.mission.speed;
  m.waypoints.push_back(here);
  for (auto& w : waypoints) m.waypoints.push_back(w);
  v.mission = std::move(m);
  v.trajectory = world::Trajectory(v.mission);
  v.mission_start = sim_.now();
}

void SimBridge::apply(Vehicle& v, const Command& cmd) {
  const auto gps_now = options_.gps_epoch_us + sim_.now().micros;
  if (v.pending_completion) {
    gs_.record_ack({*v.pending_completion, v.spec.id, AckStatus::kCompleted,
                    "superseded by " + cmd.cmd_id, gps_now});
    v.pending_completion.reset();
  }
  switch (cmd.action) {
    case Action::kGoto:
      retarget(v, {*cmd.waypoint});
      break;
    case Action::kReturnHome:
      retarget(v, {v.spec.mission.waypoints.front()});
      break;
    case Action::kStartExperiment:
      retarget(v, v.spec.mission.waypoints);
      break;
    case Action::kStop:
      retarget(v, {});
      break;
  }
  v.pending_completion = cmd.cmd_id;
}

void SimBridge::on_event(sim::Event& e) {
  sim_.schedule(sim_.now() + options_.telemetry_period, e.node_id, sim::EventKind::kCustom,
                {{"telemetry", true}});
  try {
    apply_inbox();
    emit_telemetry(vehicles_.at(e.node_id));
  } catch (const NoActiveRun&) {
    // Vehicles keep flying while no run is recording.
  }
}

void SimBridge::emit_telemetry(Vehicle& v) {
  const auto now = sim_.now();
  const auto gps_now = options_.gps_epoch_us + now.micros;
  if (v.pending_completion && (now - v.mission_start).seconds() >= v.trajectory.duration_s()) {
    gs_.record_ack({*v.pending_completion, v.spec.id, AckStatus::kCompleted, "", gps_now});
    v.pending_completion.reset();
  }

  TelemetryMessage m;
  m.node_id = v.spec.id;
  m.ts_gps_us = gps_now;
  m.position = v.trajectory.position_at(now - v.mission_start);
  m.battery_fraction = std::clamp(1.0 - now.seconds() / v.endurance_s, 0.0, 1.0);
  if (m.battery_fraction == 0.0) {
    std::lock_guard lock(inbox_mu_);
    empty_.insert(v.spec.id);
  }

  auto& rng = sim_.rng(v.spec.id);
  int in_range = 0;
  for (const auto& s : cfg_.layout.sensors) {
    if (!s.enabled) continue;
    const double p = radio::reception_prob(world::distance(m.position, s.position), v.spec.radio,
                                           cfg_.radio_for(s), cfg_.propagation);
    if (p > 0.0) ++in_range;
    if (rng.next_uniform() < p) ++v.counters[s.id];
  }
  m.counters = v.counters;
  m.link_state = in_range > 0 ? "in_range:" + std::to_string(in_range) : "idle";
  gs_.ingest_telemetry(std::move(m));
}

}  // namespace fieldsim::gs
