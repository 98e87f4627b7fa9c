#include "fieldsim/sim/trace.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <sstream>

#include "fieldsim/errors.hpp"

namespace fieldsim::sim {
namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 5> kKindNames{{
    {EventKind::kBeacon, "beacon"},
    {EventKind::kStateTimer, "state-timer"},
    {EventKind::kWaypointReached, "waypoint-reached"},
    {EventKind::kGpsFix, "gps-fix"},
    {EventKind::kCustom, "custom"},
}};

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "custom";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (const auto& [k, name] : kKindNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

std::string event_to_json_line(const Event& e) {
  nlohmann::ordered_json j;
  j["id"] = e.id;
  j["time_us"] = e.time.micros;
  j["node_id"] = e.node_id;
  j["kind"] = to_string(e.kind);
  j["payload"] = e.payload;
  return j.dump();
}

Event event_from_json_line(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  Event e;
  e.id = j.at("id").get<std::uint64_t>();
  e.time = SimTime{j.at("time_us").get<std::int64_t>()};
  e.node_id = j.at("node_id").get<std::string>();
  const auto kind = event_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw ConfigInvalid("kind", "unknown event kind");
  e.kind = *kind;
  e.payload = j.value("payload", nlohmann::json{});
  return e;
}

std::vector<Event> read_trace_jsonl(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) events.push_back(event_from_json_line(line));
  }
  return events;
}

bool EventTrace::is_sorted() const {
  return std::is_sorted(events.begin(), events.end(), executes_before);
}

void EventTrace::write_jsonl(std::ostream& out) const {
  for (const auto& e : events) out << event_to_json_line(e) << '\n';
}

std::string EventTrace::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

std::string EventTrace::hash() const { return fnv1a_hex(to_jsonl()); }

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace fieldsim::sim
