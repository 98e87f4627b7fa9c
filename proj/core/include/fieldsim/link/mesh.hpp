#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/sim/time.hpp"

namespace fieldsim::link {

// Timings of the association-based (mesh) link. Defaults are calibration
// values, not measurements: with 8 s from first contact to a usable link,
// passes at 10 m/s never connect in the canonical scenario.
struct MeshParams {
  double t_scan_s = 2.0;
  double t_assoc_s = 6.0;
  // Minimum dwell in DISCONNECTED after losing a peer before scanning again.
  double t_handover_s = 4.0;
  double beacon_interval_s = 1.0;
  // A CONNECTED link not stepped for longer than this is considered stale.
  double keepalive_timeout_s = 3.0;

  void validate(std::string_view path = "mesh") const;
};

enum class MeshPhase { kDisconnected, kScanning, kAssociating, kConnected };
const char* to_string(MeshPhase p);

struct MeshLinkState {
  MeshPhase phase = MeshPhase::kDisconnected;
  sim::SimTime phase_entered_at;
  std::optional<std::string> peer;
  sim::SimTime last_step;
  // Set when the link dropped from a peer; gates rescanning on t_handover.
  bool after_drop = false;
};

struct MeshEvent {
  enum class Kind { kPhaseChange, kDataExchange };
  Kind kind;
  sim::SimTime at;
  MeshPhase from;
  MeshPhase to;
};

struct MeshStepResult {
  MeshLinkState state;
  std::vector<MeshEvent> events;

  bool exchanged_data() const;
};

// Advances the link by at most one phase transition:
//   range lost            -> DISCONNECTED (peer cleared)
//   DISCONNECTED + range  -> SCANNING (after t_handover if the link dropped)
//   SCANNING dwell        -> ASSOCIATING with `candidate_peer`
//   ASSOCIATING dwell     -> CONNECTED
// A data-exchange event is emitted only by steps that begin and end in
// CONNECTED. Throws std::invalid_argument if now < state.phase_entered_at.
MeshStepResult mesh_step(const MeshLinkState& state, bool in_range, sim::SimTime now,
                         const MeshParams& params, std::string_view candidate_peer = {});

MeshParams mesh_params_from_json(const nlohmann::json& j, std::string_view path);
nlohmann::json to_json(const MeshParams& p);

}  // namespace fieldsim::link
