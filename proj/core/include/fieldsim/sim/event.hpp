#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fieldsim/sim/time.hpp"

namespace fieldsim::sim {

enum class EventKind { kBeacon, kStateTimer, kWaypointReached, kGpsFix, kCustom };

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view s);

struct Event {
  std::uint64_t id = 0;
  SimTime time;
  std::string node_id;
  EventKind kind = EventKind::kCustom;
  nlohmann::json payload;
};

// Execution order: (time, id) ascending.
inline bool executes_before(const Event& a, const Event& b) {
  return a.time != b.time ? a.time < b.time : a.id < b.id;
}

}  // namespace fieldsim::sim
