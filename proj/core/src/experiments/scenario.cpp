#include "fieldsim/experiments/scenario.hpp"

#include <algorithm>
#include <set>

#include "fieldsim/errors.hpp"
#include "fieldsim/json_util.hpp"
#include "fieldsim/sim/trace.hpp"

namespace fieldsim::experiments {

using json_util::join;

const char* to_string(LinkProtocol p) {
  switch (p) {
    case LinkProtocol::kMesh: return "mesh";
    case LinkProtocol::kBroadcast: return "broadcast";
    case LinkProtocol::kAdhocThroughput: return "adhoc_throughput";
  }
  return "?";
}

namespace {

LinkProtocol protocol_from_string(const std::string& s) {
  if (s == "mesh") return LinkProtocol::kMesh;
  if (s == "broadcast") return LinkProtocol::kBroadcast;
  if (s == "adhoc_throughput") return LinkProtocol::kAdhocThroughput;
  throw ConfigInvalid("link_protocol", "must be one of mesh, broadcast, adhoc_throughput");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
  std::filesystem::path p(file);
  return p.is_absolute() || base.empty() ? p : base / p;
}

world::SensorLayout parse_layout_source(const nlohmann::json& j, const std::filesystem::path& base,
                                        const world::FieldBounds& field) {
  if (j.contains("file")) {
    const auto file = resolve(base, json_util::require<std::string>(j, "file", "layout"));
    return world::layout_from_json(json_util::parse_file(file.string()), file.string());
  }
  if (j.contains("generate")) {
    const auto& g = j.at("generate");
    const int count = json_util::require<int>(g, "count", "layout.generate");
    if (count < 1) throw ConfigInvalid("layout.generate.count", "must be >= 1");
    world::LayoutOptions opts;
    opts.min_separation = json_util::optional<double>(g, "min_separation", "layout.generate", opts.min_separation);
    opts.antenna_height = json_util::optional<double>(g, "antenna_height", "layout.generate", opts.antenna_height);
    sim::RngStream rng(json_util::optional<std::uint64_t>(g, "seed", "layout.generate", 1), sim::stream_id_for("layout"));
    try {
      return world::generate_layout(count, field, rng, opts);
    } catch (const LayoutInfeasible& e) {
      throw ConfigInvalid("layout.generate", e.what());
    }
  }
  return world::layout_from_json(j, "layout");
}

// Any layout source may carry "disable": [ids] to switch sensors off.
world::SensorLayout parse_layout(const nlohmann::json& j, const std::filesystem::path& base,
                                 const world::FieldBounds& field) {
  auto layout = parse_layout_source(j, base, field);
  if (j.is_object() && j.contains("disable")) {
    const auto ids = json_util::get_as<std::vector<std::string>>(j.at("disable"), "layout.disable");
    for (const auto& id : ids) {
      auto* s = layout.find(id);
      if (!s) throw ConfigInvalid("layout.disable", "unknown sensor \"" + id + "\"");
      s->enabled = false;
    }
  }
  return layout;
}

radio::PropagationModel parse_propagation(const nlohmann::json& j, const std::filesystem::path& base) {
  const std::string path = "propagation";
  const double ratio = json_util::optional<double>(j, "reliable_ratio", path, radio::kDefaultReliableRatio);
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigInvalid(join(path, "reliable_ratio"), "must lie in (0, 1]");

  std::vector<radio::RangeAnchor> anchors;
  bool calibrate_from_anchors = true;
  if (j.contains("anchors_file")) {
    const auto file = resolve(base, json_util::require<std::string>(j, "anchors_file", path));
    anchors = radio::load_anchors(file.string());
  } else if (j.contains("anchors")) {
    anchors = radio::anchors_from_json(j.at("anchors"), join(path, "anchors"));
  } else if (j.contains("classes")) {
    calibrate_from_anchors = false;
  } else {
    anchors = radio::field_anchors();
  }

  radio::PropagationModel model;
  if (calibrate_from_anchors) model = radio::calibrate(anchors, {}, ratio);
  if (j.contains("classes")) {
    const auto& classes = j.at("classes");
    if (!classes.is_object()) throw ConfigInvalid(join(path, "classes"), "must be an object");
    for (const auto& [name, params] : classes.items()) {
      const auto cls = radio::radio_class_from_string(name);
      const auto p = join(join(path, "classes"), name);
      if (!cls) throw ConfigInvalid(p, "unknown radio class");
      model.set(*cls, radio::range_params_from_json(params, p));
    }
  }
  return model;
}

SweepParams parse_sweep(const nlohmann::json& j) {
  const std::string path = "sweep";
  SweepParams s;
  s.start_m = json_util::optional<double>(j, "start_m", path, s.start_m);
  s.step_m = json_util::optional<double>(j, "step_m", path, s.step_m);
  s.stop_m = json_util::optional<double>(j, "stop_m", path, s.stop_m);
  s.reps = json_util::optional<int>(j, "reps", path, s.reps);
  s.jitter = json_util::optional<double>(j, "jitter", path, s.jitter);
  const auto mode = json_util::optional<std::string>(j, "mode", path, "tcp");
  if (mode == "tcp") {
    s.mode = SweepMode::kTcp;
  } else if (mode == "udp") {
    s.mode = SweepMode::kUdp;
  } else {
    throw ConfigInvalid(join(path, "mode"), "must be \"tcp\" or \"udp\"");
  }
  if (!(s.start_m > 0.0)) throw ConfigInvalid(join(path, "start_m"), "must be > 0");
  if (!(s.step_m > 0.0)) throw ConfigInvalid(join(path, "step_m"), "must be > 0");
  if (!(s.stop_m >= s.start_m)) throw ConfigInvalid(join(path, "stop_m"), "must be >= start_m");
  if (s.reps < 1) throw ConfigInvalid(join(path, "reps"), "must be >= 1");
  if (!(s.jitter >= 0.0 && s.jitter < 1.0)) throw ConfigInvalid(join(path, "jitter"), "must lie in [0, 1)");
  return s;
}

}  // namespace

radio::RadioConfig ScenarioConfig::radio_for(const world::Sensor& sensor) const {
  radio::RadioConfig r = sensor_radio;
  r.orientation = sensor.orientation;
  r.mount_height = sensor.antenna_height;
  return r;
}

void ScenarioConfig::validate() const {
  if (!(duration_s > 0.0)) throw ConfigInvalid("duration_s", "must be > 0");
  if (replications < 1) throw ConfigInvalid("replications", "must be >= 1");
  if (drones.empty()) throw ConfigInvalid("drones", "at least one drone is required");
  layout.validate(field);
  sensor_radio.validate("sensor_radio");
  std::set<std::string, std::less<>> ids;
  for (std::size_t i = 0; i < drones.size(); ++i) {
    const auto p = json_util::index("drones", i);
    if (drones[i].id.empty()) throw ConfigInvalid(join(p, "id"), "must not be empty");
    if (!ids.insert(drones[i].id).second) throw ConfigInvalid(join(p, "id"), "duplicate drone id");
    if (layout.find(drones[i].id)) throw ConfigInvalid(join(p, "id"), "collides with a sensor id");
    drones[i].mission.validate(join(p, "mission"));
    drones[i].radio.validate(join(p, "radio"));
    if (!propagation.has(drones[i].radio.radio_class)) {
      throw ConfigInvalid(join(join(p, "radio"), "radio_class"), "has no propagation model");
    }
  }
  if (protocol != LinkProtocol::kAdhocThroughput) {
    if (layout.sensors.empty()) throw ConfigInvalid("layout.sensors", "collection runs need sensors");
    if (!propagation.has(sensor_radio.radio_class)) {
      throw ConfigInvalid("sensor_radio.radio_class", "has no propagation model");
    }
  }
  if (!(traffic.message_interval_s > 0.0)) throw ConfigInvalid("traffic.message_interval_s", "must be > 0");
  if (traffic.payload_bytes < 0) throw ConfigInvalid("traffic.payload_bytes", "must be >= 0");
  if (protocol == LinkProtocol::kBroadcast && traffic.payload_bytes > link_params.broadcast.max_payload) {
    throw ConfigInvalid("traffic.payload_bytes", "exceeds the broadcast payload limit");
  }
  link_params.mesh.validate("link_params.mesh");
  link_params.broadcast.validate("link_params.broadcast");
  link_params.throughput.validate("link_params.throughput");
}

std::string ScenarioConfig::hash() const { return sim::fnv1a_hex(to_json(*this).dump()); }

ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigInvalid("", "scenario must be a JSON object");
  ScenarioConfig cfg;
  cfg.name = json_util::optional<std::string>(j, "name", "", "scenario");
  if (j.contains("field")) cfg.field = world::bounds_from_json(j.at("field"), "field");
  if (j.contains("layout")) cfg.layout = parse_layout(j.at("layout"), base_dir, cfg.field);
  if (j.contains("sensor_radio")) cfg.sensor_radio = radio::radio_config_from_json(j.at("sensor_radio"), "sensor_radio");

  const auto& drones = json_util::require_node(j, "drones", "");
  if (!drones.is_array()) throw ConfigInvalid("drones", "must be an array");
  for (std::size_t i = 0; i < drones.size(); ++i) {
    const auto p = json_util::index("drones", i);
    DroneSpec d;
    d.id = json_util::require<std::string>(drones[i], "id", p);
    d.mission = world::mission_from_json(json_util::require_node(drones[i], "mission", p), join(p, "mission"), cfg.field);
    if (drones[i].contains("radio")) d.radio = radio::radio_config_from_json(drones[i].at("radio"), join(p, "radio"));
    cfg.drones.push_back(std::move(d));
  }

  cfg.protocol = protocol_from_string(json_util::require<std::string>(j, "link_protocol", ""));
  if (j.contains("link_params")) {
    const auto& lp = j.at("link_params");
    if (lp.contains("mesh")) cfg.link_params.mesh = link::mesh_params_from_json(lp.at("mesh"), "link_params.mesh");
    if (lp.contains("broadcast")) {
      cfg.link_params.broadcast = link::broadcast_params_from_json(lp.at("broadcast"), "link_params.broadcast");
    }
    if (lp.contains("throughput")) {
      cfg.link_params.throughput = link::throughput_model_from_json(lp.at("throughput"), "link_params.throughput");
    }
  }
  cfg.propagation = parse_propagation(j.value("propagation", nlohmann::json::object()), base_dir);
  if (j.contains("traffic")) {
    const auto& t = j.at("traffic");
    cfg.traffic.message_interval_s = json_util::optional<double>(t, "message_interval_s", "traffic", 1.0);
    cfg.traffic.payload_bytes = json_util::optional<int>(t, "payload_bytes", "traffic", 64);
  }
  if (j.contains("sweep")) cfg.sweep = parse_sweep(j.at("sweep"));

  double longest = 0.0;
  for (const auto& d : cfg.drones) longest = std::max(longest, d.mission.duration_s());
  cfg.duration_s = json_util::optional<double>(j, "duration_s", "", longest);
  cfg.replications = json_util::optional<int>(j, "replications", "", 1);
  cfg.master_seed = json_util::optional<std::uint64_t>(j, "master_seed", "", 0);
  cfg.validate();
  return cfg;
}

ScenarioConfig with_flight(const ScenarioConfig& cfg, std::optional<double> altitude,
                           std::optional<double> speed) {
  auto out = cfg;
  double old_longest = 0.0;
  double new_longest = 0.0;
  for (auto& d : out.drones) {
    old_longest = std::max(old_longest, d.mission.duration_s());
    if (!d.mission.stationary()) {
      if (altitude) {
        for (auto& w : d.mission.waypoints) w.z = *altitude;
        d.radio.mount_height = *altitude;
      }
      if (speed) d.mission.speed = *speed;
    }
    new_longest = std::max(new_longest, d.mission.duration_s());
  }
  out.duration_s = out.duration_s <= old_longest ? new_longest : std::max(out.duration_s, new_longest);
  out.validate();
  return out;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(json_util::parse_file(path.string()), path.parent_path());
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["field"] = {{"width", cfg.field.width}, {"height", cfg.field.height}};
  j["layout"] = world::to_json(cfg.layout);
  j["sensor_radio"] = radio::to_json(cfg.sensor_radio);
  j["drones"] = nlohmann::json::array();
  for (const auto& d : cfg.drones) {
    j["drones"].push_back({{"id", d.id}, {"mission", world::to_json(d.mission)}, {"radio", radio::to_json(d.radio)}});
  }
  j["link_protocol"] = to_string(cfg.protocol);
  j["link_params"] = {{"mesh", link::to_json(cfg.link_params.mesh)},
                      {"broadcast", link::to_json(cfg.link_params.broadcast)},
                      {"throughput", link::to_json(cfg.link_params.throughput)}};
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [cls, params] : cfg.propagation.classes()) classes[radio::to_string(cls)] = radio::to_json(params);
  j["propagation"] = {{"classes", classes}};
  j["traffic"] = {{"message_interval_s", cfg.traffic.message_interval_s}, {"payload_bytes", cfg.traffic.payload_bytes}};
  j["sweep"] = {{"start_m", cfg.sweep.start_m}, {"step_m", cfg.sweep.step_m}, {"stop_m", cfg.sweep.stop_m},
                {"reps", cfg.sweep.reps}, {"mode", cfg.sweep.mode == SweepMode::kTcp ? "tcp" : "udp"},
                {"jitter", cfg.sweep.jitter}};
  j["duration_s"] = cfg.duration_s;
  j["replications"] = cfg.replications;
  j["master_seed"] = cfg.master_seed;
  return j;
}

}  // namespace fieldsim::experiments
