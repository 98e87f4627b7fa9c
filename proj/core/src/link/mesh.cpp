#include "fieldsim/link/mesh.hpp"

#include <algorithm>
#include <stdexcept>

#include "fieldsim/errors.hpp"
#include "fieldsim/json_util.hpp"

namespace fieldsim::link {

using json_util::join;

void MeshParams::validate(std::string_view path) const {
  const std::pair<const char*, double> fields[] = {
      {"t_scan_s", t_scan_s},           {"t_assoc_s", t_assoc_s},
      {"t_handover_s", t_handover_s},   {"beacon_interval_s", beacon_interval_s},
      {"keepalive_timeout_s", keepalive_timeout_s}};
  for (const auto& [name, value] : fields) {
    if (!(value > 0.0)) throw ConfigInvalid(join(path, name), "must be > 0");
  }
}

const char* to_string(MeshPhase p) {
  switch (p) {
    case MeshPhase::kDisconnected: return "DISCONNECTED";
    case MeshPhase::kScanning: return "SCANNING";
    case MeshPhase::kAssociating: return "ASSOCIATING";
    case MeshPhase::kConnected: return "CONNECTED";
  }
  return "?";
}

bool MeshStepResult::exchanged_data() const {
  return std::any_of(events.begin(), events.end(),
                     [](const MeshEvent& e) { return e.kind == MeshEvent::Kind::kDataExchange; });
}

MeshStepResult mesh_step(const MeshLinkState& state, bool in_range, sim::SimTime now,
                         const MeshParams& params, std::string_view candidate_peer) {
  if (now < state.phase_entered_at) throw std::invalid_argument("mesh_step: time went backwards");

  MeshStepResult out{state, {}};
  auto& next = out.state;
  const sim::SimTime since_last = now - state.last_step;
  next.last_step = now;

  auto enter = [&](MeshPhase phase) {
    out.events.push_back({MeshEvent::Kind::kPhaseChange, now, next.phase, phase});
    next.phase = phase;
    next.phase_entered_at = now;
  };
  auto drop = [&] {
    next.after_drop = next.peer.has_value();
    next.peer.reset();
    enter(MeshPhase::kDisconnected);
  };

  const double dwell = (now - state.phase_entered_at).seconds();
  if (!in_range) {
    if (state.phase != MeshPhase::kDisconnected) drop();
    return out;
  }

  switch (state.phase) {
    case MeshPhase::kDisconnected:
      if (!state.after_drop || dwell >= params.t_handover_s) {
        next.after_drop = false;
        enter(MeshPhase::kScanning);
      }
      break;
    case MeshPhase::kScanning:
      if (dwell >= params.t_scan_s) {
        next.peer = std::string(candidate_peer);
        enter(MeshPhase::kAssociating);
      }
      break;
    case MeshPhase::kAssociating:
      if (dwell >= params.t_assoc_s) enter(MeshPhase::kConnected);
      break;
    case MeshPhase::kConnected:
      if (since_last.seconds() > params.keepalive_timeout_s) {
        drop();
      } else {
        out.events.push_back({MeshEvent::Kind::kDataExchange, now, MeshPhase::kConnected,
                              MeshPhase::kConnected});
      }
      break;
  }
  return out;
}

MeshParams mesh_params_from_json(const nlohmann::json& j, std::string_view path) {
  MeshParams p;
  p.t_scan_s = json_util::optional<double>(j, "t_scan_s", path, p.t_scan_s);
  p.t_assoc_s = json_util::optional<double>(j, "t_assoc_s", path, p.t_assoc_s);
  p.t_handover_s = json_util::optional<double>(j, "t_handover_s", path, p.t_handover_s);
  p.beacon_interval_s = json_util::optional<double>(j, "beacon_interval_s", path, p.beacon_interval_s);
  p.keepalive_timeout_s = json_util::optional<double>(j, "keepalive_timeout_s", path, p.keepalive_timeout_s);
  p.validate(path);
  return p;
}

nlohmann::json to_json(const MeshParams& p) {
  return {{"t_scan_s", p.t_scan_s},
          {"t_assoc_s", p.t_assoc_s},
          {"t_handover_s", p.t_handover_s},
          {"beacon_interval_s", p.beacon_interval_s},
          {"keepalive_timeout_s", p.keepalive_timeout_s}};
}

}  // namespace fieldsim::link
