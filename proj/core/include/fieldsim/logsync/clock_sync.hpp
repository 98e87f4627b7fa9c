#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/sim/time.hpp"

namespace fieldsim::logsync {

struct GpsTimeFix {
  std::string node_id;
  sim::SimTime gps_time;
  sim::SimTime local_time_at_fix;
};

// Free-running node clock: local = true + offset + drift * true.
struct NodeClock {
  double offset_s = 0.0;
  double drift_ppm = 0.0;
  std::optional<GpsTimeFix> last_fix;

  // Throws std::invalid_argument beyond +/-1000 ppm.
  void validate() const;
};

struct LogRecord {
  std::string node_id;
  sim::SimTime local_time;
  std::string kind;
  nlohmann::json payload;
};

sim::SimTime local_time(const NodeClock& clock, sim::SimTime true_t);

// Linear estimate local = offset_us + rate * true_us. A single fix (or fixes
// sharing one GPS instant) yields rate = 1; two or more distinct fixes are
// fitted by least squares.
struct ClockEstimate {
  double offset_us = 0.0;
  double rate = 1.0;
  double anchor_true_us = 0.0;
  double anchor_local_us = 0.0;

  sim::SimTime to_true(sim::SimTime local) const;
};

// Uses only fixes whose node_id equals `node_id`; throws NoFixAvailable when
// there are none.
ClockEstimate estimate_clock(std::string_view node_id, std::span<const GpsTimeFix> fixes);

// Estimated true time of a record.
sim::SimTime correct(const LogRecord& record, std::span<const GpsTimeFix> fixes);

struct MergedEntry {
  LogRecord record;
  sim::SimTime estimated_true;
  // Position of the record within its node's log.
  std::size_t sequence = 0;
};

using MergedLog = std::vector<MergedEntry>;

// Corrects every record and orders them globally by (estimated true time,
// node id, sequence). Throws NoFixAvailable naming the first node without a
// fix.
MergedLog merge_logs(const std::map<std::string, std::vector<LogRecord>>& logs,
                     std::span<const GpsTimeFix> fixes);

// Log files are JSON lines {node_id, local_time_us, kind, payload}; fix files
// are a JSON array of {node_id, gps_time_us, local_time_us}.
std::vector<LogRecord> read_log_jsonl(std::istream& in);
std::vector<GpsTimeFix> fixes_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LogRecord& r);
nlohmann::json to_json(const MergedEntry& e);

}  // namespace fieldsim::logsync
