#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/world/geometry.hpp"

// Line-delimited JSON wire objects shared by vehicles, the service and
// operator sessions. Every object carries a "type" discriminator; see
// docs/wire-format.md for the field-by-field schema.
namespace fieldsim::gs {

enum class MessageType { kTelemetry, kCommand, kAck, kHello, kBye };

const char* to_string(MessageType t);
// Throws MalformedMessage("type", ...) for anything outside the five types.
MessageType message_type(const nlohmann::json& j);

// Display-only geodetic reference for the local frame.
struct GeoOrigin {
  double lat = 0.0;
  double lon = 0.0;
};

struct TelemetryMessage {
  std::string node_id;
  std::int64_t ts_gps_us = 0;
  world::Position position;
  std::optional<double> lat;
  std::optional<double> lon;
  double battery_fraction = 1.0;
  std::map<std::string, std::int64_t> counters;
  std::string link_state;
};

enum class Action { kGoto, kStartExperiment, kStop, kReturnHome };

const char* to_string(Action a);

struct Command {
  std::string cmd_id;
  // Empty `targets` together with target_all means every connected vehicle.
  bool target_all = false;
  std::vector<std::string> targets;
  Action action = Action::kStop;
  std::optional<world::Position> waypoint;
  std::string issued_by;
  std::int64_t issued_at_us = 0;
};

enum class AckStatus { kAccepted, kRejected, kCompleted };

const char* to_string(AckStatus s);

struct Ack {
  std::string cmd_id;
  std::string node_id;
  AckStatus status = AckStatus::kAccepted;
  std::string detail;
  std::int64_t at_us = 0;
};

struct Hello {
  std::string session_id;
  std::string role;
  std::string run_id;
};

struct Bye {
  std::string session_id;
  std::string reason;
};

nlohmann::json to_json(const TelemetryMessage& m);
nlohmann::json to_json(const Command& c);
nlohmann::json to_json(const Ack& a);
nlohmann::json to_json(const Hello& h);
nlohmann::json to_json(const Bye& b);

// Parsers validate every member and raise MalformedMessage naming the
// offending field. A command without cmd_id or issued_at parses with those
// left empty/zero so the service can assign them.
TelemetryMessage telemetry_from_json(const nlohmann::json& j);
Command command_from_json(const nlohmann::json& j);
Ack ack_from_json(const nlohmann::json& j);

// Parses one wire line; MalformedMessage on syntax errors.
nlohmann::json parse_line(std::string_view line);
// Compact dump terminated by '\n'.
std::string encode_line(const nlohmann::json& j);

// Adds lat/lon derived from `origin` using a local equirectangular
// approximation.
void annotate_geo(TelemetryMessage& m, const GeoOrigin& origin);

}  // namespace fieldsim::gs
