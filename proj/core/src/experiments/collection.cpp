#include "fieldsim/experiments/collection.hpp"

#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <set>

#include "fieldsim/errors.hpp"
#include "fieldsim/json_util.hpp"
#include "fieldsim/link/broadcast.hpp"
#include "fieldsim/link/mesh.hpp"
#include "fieldsim/sim/simulator.hpp"

namespace fieldsim::experiments {

std::uint64_t CollectionMetrics::total() const {
  return std::accumulate(per_sensor.begin(), per_sensor.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const SensorCount& s) { return acc + s.delivered; });
}

std::uint64_t CollectionMetrics::count(std::string_view sensor_id) const {
  for (const auto& s : per_sensor) {
    if (s.sensor_id == sensor_id) return s.delivered;
  }
  return 0;
}

namespace {

struct DroneState {
  const DroneSpec* spec;
  world::Trajectory trajectory;
  double active_until_s;
};

class CollectionHarness {
 public:
  CollectionHarness(const ScenarioConfig& cfg, int replication)
      : cfg_(cfg),
        sim_(sim::replication_seed(cfg.master_seed, static_cast<std::uint64_t>(replication)), cfg.hash()),
        channel_(cfg.link_params.broadcast) {
    for (const auto& d : cfg.drones) {
      world::Trajectory traj(d.mission);
      const double until = d.mission.stationary() ? cfg.duration_s : traj.duration_s();
      drones_.push_back({&d, std::move(traj), until});
    }
    for (const auto& s : cfg.layout.sensors) {
      sensors_[s.id] = {&s, cfg.radio_for(s), {}, 0, 0};
    }
    metrics_.protocol = to_string(cfg.protocol);
    metrics_.seed = sim_.seed();
    metrics_.replication = replication;
    metrics_.scenario_hash = cfg.hash();
    const auto& lead = cfg.drones.front().mission;
    metrics_.altitude_m = lead.waypoints.front().z;
    metrics_.speed_mps = lead.speed;
  }

  CollectionRun run() {
    sim_.set_handler([this](sim::Event& e, sim::Simulator& sim) { handle(e, sim); });
    const auto end = sim::SimTime::from_seconds(cfg_.duration_s);
    const auto interval = sim::SimTime::from_seconds(cfg_.traffic.message_interval_s);

    for (const auto& d : drones_) {
      for (std::size_t i = 0; i < d.trajectory.legs().size(); ++i) {
        const auto t = sim::SimTime::from_seconds(d.trajectory.legs()[i].t1);
        if (t <= end) sim_.schedule(t, d.spec->id, sim::EventKind::kWaypointReached, {{"leg", i}});
      }
    }
    for (const auto& s : cfg_.layout.sensors) {
      if (!s.enabled) continue;
      // Random phase within the first interval, on a 1 ms grid.
      const double u = sim_.rng(s.id).next_uniform();
      const auto phase = sim::SimTime::from_millis(static_cast<std::int64_t>(u * interval.micros / 1000));
      if (phase <= end) sim_.schedule(phase, s.id, sim::EventKind::kBeacon);
    }

    CollectionRun out;
    out.trace = sim_.run_until(end);
    for (const auto& s : cfg_.layout.sensors) {
      const auto& st = sensors_.at(s.id);
      metrics_.per_sensor.push_back({s.id, st.collected.size(), st.generated, st.duplicates});
    }
    out.metrics = metrics_;
    return out;
  }

 private:
  struct SensorState {
    const world::Sensor* sensor;
    radio::RadioConfig radio;
    std::set<std::uint64_t> collected;
    std::uint64_t generated;
    std::uint64_t duplicates;
  };

  void handle(sim::Event& e, sim::Simulator& sim) {
    if (e.kind != sim::EventKind::kBeacon) return;
    auto& st = sensors_.at(e.node_id);
    const double t = e.time.seconds();
    const link::DataMessage msg{++st.generated, e.node_id, e.time, cfg_.traffic.payload_bytes};
    world::Position tx_pos = st.sensor->position;
    tx_pos.z += st.sensor->antenna_height;
    auto& rng = sim.rng(e.node_id);

    nlohmann::json delivered = nlohmann::json::array();
    nlohmann::json transitions = nlohmann::json::array();
    auto record = [&](const std::string& drone_id) {
      if (st.collected.insert(msg.msg_id).second) {
        delivered.push_back(drone_id);
      } else {
        ++st.duplicates;
      }
    };

    if (cfg_.protocol == LinkProtocol::kMesh) {
      for (const auto& d : drones_) {
        if (t > d.active_until_s) continue;
        const auto pos = d.trajectory.position_at(t);
        const double dist = world::distance(tx_pos, pos);
        const bool in_range = dist <= radio::effective_range(st.radio, d.spec->radio, cfg_.propagation);
        auto& link_state = mesh_[{d.spec->id, e.node_id}];
        auto step = link::mesh_step(link_state, in_range, e.time, cfg_.link_params.mesh, e.node_id);
        const double u = rng.next_uniform();
        for (const auto& ev : step.events) {
          if (ev.kind == link::MeshEvent::Kind::kPhaseChange) {
            transitions.push_back({d.spec->id, link::to_string(ev.to)});
          }
        }
        if (step.exchanged_data() && u < radio::reception_prob(dist, st.radio, d.spec->radio, cfg_.propagation)) {
          record(d.spec->id);
        }
        link_state = std::move(step.state);
      }
    } else {
      std::vector<link::BroadcastReceiver> receivers;
      for (const auto& d : drones_) {
        if (t > d.active_until_s) continue;
        receivers.push_back({d.spec->id, d.trajectory.position_at(t), d.spec->radio});
      }
      for (const auto& id : channel_.deliver(msg, tx_pos, st.radio, receivers, cfg_.propagation, rng)) {
        record(id);
      }
    }

    e.payload = {{"msg_id", msg.msg_id}, {"delivered", std::move(delivered)}};
    if (!transitions.empty()) e.payload["transitions"] = std::move(transitions);

    const auto next = e.time + sim::SimTime::from_seconds(cfg_.traffic.message_interval_s);
    if (next <= sim::SimTime::from_seconds(cfg_.duration_s)) {
      sim.schedule(next, e.node_id, sim::EventKind::kBeacon);
    }
  }

  const ScenarioConfig& cfg_;
  sim::Simulator sim_;
  link::BroadcastChannel channel_;
  std::vector<DroneState> drones_;
  std::map<std::string, SensorState, std::less<>> sensors_;
  std::map<std::pair<std::string, std::string>, link::MeshLinkState> mesh_;
  CollectionMetrics metrics_;
};

}  // namespace

CollectionRun run_collection_traced(const ScenarioConfig& cfg, int replication) {
  if (cfg.protocol != LinkProtocol::kMesh && cfg.protocol != LinkProtocol::kBroadcast) {
    throw ConfigInvalid("link_protocol", "collection runs need mesh or broadcast");
  }
  if (replication < 0) throw std::invalid_argument("run_collection: replication must be >= 0");
  cfg.validate();
  return CollectionHarness(cfg, replication).run();
}

CollectionMetrics run_collection(const ScenarioConfig& cfg, int replication) {
  return run_collection_traced(cfg, replication).metrics;
}

std::vector<CollectionMetrics> run_replications(const ScenarioConfig& cfg) {
  std::vector<std::future<CollectionMetrics>> jobs;
  for (int r = 0; r < cfg.replications; ++r) {
    jobs.push_back(std::async(std::launch::async, [&cfg, r] { return run_collection(cfg, r); }));
  }
  std::vector<CollectionMetrics> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

CollectionMetrics aggregate(const std::vector<CollectionMetrics>& reps) {
  if (reps.empty()) throw EmptyInput("aggregate: no replications");
  CollectionMetrics out = reps.front();
  const double n = static_cast<double>(reps.size());
  for (std::size_t i = 0; i < out.per_sensor.size(); ++i) {
    double delivered = 0.0;
    double generated = 0.0;
    double duplicates = 0.0;
    for (const auto& r : reps) {
      delivered += static_cast<double>(r.per_sensor.at(i).delivered);
      generated += static_cast<double>(r.per_sensor.at(i).generated);
      duplicates += static_cast<double>(r.per_sensor.at(i).duplicates);
    }
    out.per_sensor[i].delivered = static_cast<std::uint64_t>(std::llround(delivered / n));
    out.per_sensor[i].generated = static_cast<std::uint64_t>(std::llround(generated / n));
    out.per_sensor[i].duplicates = static_cast<std::uint64_t>(std::llround(duplicates / n));
  }
  return out;
}

nlohmann::json to_json(const CollectionMetrics& m) {
  nlohmann::json per_sensor = nlohmann::json::array();
  for (const auto& s : m.per_sensor) {
    per_sensor.push_back({{"sensor_id", s.sensor_id},
                          {"delivered", s.delivered},
                          {"generated", s.generated},
                          {"duplicates", s.duplicates}});
  }
  nlohmann::json j;
  j["protocol"] = m.protocol;
  j["altitude_m"] = m.altitude_m;
  j["speed_mps"] = m.speed_mps;
  j["seed"] = m.seed;
  j["replication"] = m.replication;
  j["scenario_hash"] = m.scenario_hash;
  j["total"] = m.total();
  j["per_sensor"] = per_sensor;
  return j;
}

CollectionMetrics metrics_from_json(const nlohmann::json& j) {
  const std::string path = "metrics";
  CollectionMetrics m;
  m.protocol = json_util::require<std::string>(j, "protocol", path);
  m.altitude_m = json_util::optional<double>(j, "altitude_m", path, 0.0);
  m.speed_mps = json_util::optional<double>(j, "speed_mps", path, 0.0);
  m.seed = json_util::optional<std::uint64_t>(j, "seed", path, 0);
  m.replication = json_util::optional<int>(j, "replication", path, 0);
  m.scenario_hash = json_util::optional<std::string>(j, "scenario_hash", path, "");
  const auto& arr = json_util::require_node(j, "per_sensor", path);
  if (!arr.is_array()) throw ConfigInvalid("metrics.per_sensor", "must be an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto p = json_util::index("metrics.per_sensor", i);
    SensorCount s;
    s.sensor_id = json_util::require<std::string>(arr[i], "sensor_id", p);
    s.delivered = json_util::require<std::uint64_t>(arr[i], "delivered", p);
    s.generated = json_util::optional<std::uint64_t>(arr[i], "generated", p, s.delivered);
    s.duplicates = json_util::optional<std::uint64_t>(arr[i], "duplicates", p, 0);
    m.per_sensor.push_back(std::move(s));
  }
  return m;
}

}  // namespace fieldsim::experiments
