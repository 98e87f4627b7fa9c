#include "fieldsim/gs/messages.hpp"

#include <cmath>
#include <numbers>

#include "fieldsim/errors.hpp"

namespace fieldsim::gs {
namespace {

using nlohmann::json;

const json& member(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw MalformedMessage(key, "is required");
  return *it;
}

std::string string_member(const json& j, const char* key) {
  const auto& v = member(j, key);
  if (!v.is_string()) throw MalformedMessage(key, "must be a string");
  auto s = v.get<std::string>();
  if (s.empty()) throw MalformedMessage(key, "must not be empty");
  return s;
}

std::string optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw MalformedMessage(key, "must be a string");
  return it->get<std::string>();
}

double number_of(const json& v, const std::string& field) {
  if (!v.is_number()) throw MalformedMessage(field, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw MalformedMessage(field, "must be finite");
  return d;
}

std::int64_t integer_of(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw MalformedMessage(field, "must be an integer");
  return v.get<std::int64_t>();
}

world::Position position_of(const json& v, const std::string& field) {
  if (!v.is_object()) throw MalformedMessage(field, "must be an object");
  world::Position p;
  for (auto [key, out] : {std::pair{"x", &p.x}, std::pair{"y", &p.y}, std::pair{"z", &p.z}}) {
    auto it = v.find(key);
    if (it == v.end()) throw MalformedMessage(field + "." + key, "is required");
    *out = number_of(*it, field + "." + key);
  }
  if (p.z < 0.0) throw MalformedMessage(field + ".z", "must be >= 0");
  return p;
}

void expect_type(const json& j, MessageType want) {
  if (message_type(j) != want) {
    throw MalformedMessage("type", std::string("expected ") + to_string(want));
  }
}

json position_json(const world::Position& p) { return {{"x", p.x}, {"y", p.y}, {"z", p.z}}; }

}  // namespace

const char* to_string(MessageType t) {
  switch (t) {
    case MessageType::kTelemetry: return "telemetry";
    case MessageType::kCommand: return "command";
    case MessageType::kAck: return "ack";
    case MessageType::kHello: return "hello";
    case MessageType::kBye: return "bye";
  }
  return "?";
}

MessageType message_type(const json& j) {
  if (!j.is_object()) throw MalformedMessage("type", "message must be a JSON object");
  const auto t = string_member(j, "type");
  for (auto c : {MessageType::kTelemetry, MessageType::kCommand, MessageType::kAck,
                 MessageType::kHello, MessageType::kBye}) {
    if (t == to_string(c)) return c;
  }
  throw MalformedMessage("type", "unknown message type '" + t + "'");
}

const char* to_string(Action a) {
  switch (a) {
    case Action::kGoto: return "goto";
    case Action::kStartExperiment: return "start_experiment";
    case Action::kStop: return "stop";
    case Action::kReturnHome: return "return_home";
  }
  return "?";
}

const char* to_string(AckStatus s) {
  switch (s) {
    case AckStatus::kAccepted: return "accepted";
    case AckStatus::kRejected: return "rejected";
    case AckStatus::kCompleted: return "completed";
  }
  return "?";
}

json to_json(const TelemetryMessage& m) {
  json j = {{"type", "telemetry"},
            {"node_id", m.node_id},
            {"ts_gps", m.ts_gps_us},
            {"position", position_json(m.position)}};
  if (m.lat) j["lat"] = *m.lat;
  if (m.lon) j["lon"] = *m.lon;
  j["battery_fraction"] = m.battery_fraction;
  j["counters"] = m.counters;
  j["link_state"] = m.link_state;
  return j;
}

json to_json(const Command& c) {
  json j = {{"type", "command"}, {"cmd_id", c.cmd_id}};
  if (c.target_all) {
    j["targets"] = "all";
  } else {
    j["targets"] = c.targets;
  }
  j["action"] = to_string(c.action);
  if (c.waypoint) j["waypoint"] = position_json(*c.waypoint);
  j["issued_by"] = c.issued_by;
  j["issued_at"] = c.issued_at_us;
  return j;
}

json to_json(const Ack& a) {
  return {{"type", "ack"},     {"cmd_id", a.cmd_id}, {"node_id", a.node_id},
          {"status", to_string(a.status)}, {"detail", a.detail}, {"at", a.at_us}};
}

json to_json(const Hello& h) {
  return {{"type", "hello"}, {"session_id", h.session_id}, {"role", h.role}, {"run_id", h.run_id}};
}

json to_json(const Bye& b) {
  return {{"type", "bye"}, {"session_id", b.session_id}, {"reason", b.reason}};
}

TelemetryMessage telemetry_from_json(const json& j) {
  expect_type(j, MessageType::kTelemetry);
  TelemetryMessage m;
  m.node_id = string_member(j, "node_id");
  m.ts_gps_us = integer_of(member(j, "ts_gps"), "ts_gps");
  if (m.ts_gps_us < 0) throw MalformedMessage("ts_gps", "must be >= 0");
  m.position = position_of(member(j, "position"), "position");
  if (auto it = j.find("lat"); it != j.end() && !it->is_null()) m.lat = number_of(*it, "lat");
  if (auto it = j.find("lon"); it != j.end() && !it->is_null()) m.lon = number_of(*it, "lon");
  m.battery_fraction = number_of(member(j, "battery_fraction"), "battery_fraction");
  if (m.battery_fraction < 0.0 || m.battery_fraction > 1.0) {
    throw MalformedMessage("battery_fraction", "must be within [0, 1]");
  }
  if (auto it = j.find("counters"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw MalformedMessage("counters", "must be an object");
    for (const auto& [k, v] : it->items()) m.counters[k] = integer_of(v, "counters." + k);
  }
  m.link_state = optional_string(j, "link_state");
  return m;
}

Command command_from_json(const json& j) {
  expect_type(j, MessageType::kCommand);
  Command c;
  c.cmd_id = optional_string(j, "cmd_id");
  const auto& targets = member(j, "targets");
  if (targets.is_string()) {
    if (targets.get<std::string>() != "all") throw MalformedMessage("targets", "must be \"all\" or a list of node ids");
    c.target_all = true;
  } else if (targets.is_array()) {
    if (targets.empty()) throw MalformedMessage("targets", "must not be empty");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (!targets[i].is_string()) {
        throw MalformedMessage("targets[" + std::to_string(i) + "]", "must be a string");
      }
      c.targets.push_back(targets[i].get<std::string>());
    }
  } else {
    throw MalformedMessage("targets", "must be \"all\" or a list of node ids");
  }
  const auto action = string_member(j, "action");
  bool known = false;
  for (auto a : {Action::kGoto, Action::kStartExperiment, Action::kStop, Action::kReturnHome}) {
    if (action == to_string(a)) {
      c.action = a;
      known = true;
    }
  }
  if (!known) throw MalformedMessage("action", "unknown action '" + action + "'");
  if (auto it = j.find("waypoint"); it != j.end() && !it->is_null()) c.waypoint = position_of(*it, "waypoint");
  if (c.action == Action::kGoto && !c.waypoint) throw MalformedMessage("waypoint", "is required for goto");
  c.issued_by = optional_string(j, "issued_by");
  if (auto it = j.find("issued_at"); it != j.end() && !it->is_null()) c.issued_at_us = integer_of(*it, "issued_at");
  return c;
}

Ack ack_from_json(const json& j) {
  expect_type(j, MessageType::kAck);
  Ack a;
  a.cmd_id = string_member(j, "cmd_id");
  a.node_id = string_member(j, "node_id");
  const auto status = string_member(j, "status");
  bool known = false;
  for (auto s : {AckStatus::kAccepted, AckStatus::kRejected, AckStatus::kCompleted}) {
    if (status == to_string(s)) {
      a.status = s;
      known = true;
    }
  }
  if (!known) throw MalformedMessage("status", "unknown status '" + status + "'");
  a.detail = optional_string(j, "detail");
  if (auto it = j.find("at"); it != j.end() && !it->is_null()) a.at_us = integer_of(*it, "at");
  return a;
}

json parse_line(std::string_view line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedMessage("line", std::string("not valid JSON (byte ") + std::to_string(e.byte) + ")");
  }
}

std::string encode_line(const json& j) { return j.dump() + "\n"; }

void annotate_geo(TelemetryMessage& m, const GeoOrigin& origin) {
  constexpr double kEarthRadius = 6371008.8;
  constexpr double kDeg = 180.0 / std::numbers::pi;
  m.lat = origin.lat + (m.position.y / kEarthRadius) * kDeg;
  m.lon = origin.lon + (m.position.x / (kEarthRadius * std::cos(origin.lat / kDeg))) * kDeg;
}

}  // namespace fieldsim::gs
