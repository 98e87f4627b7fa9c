#include "fieldsim/logsync/clock_sync.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <stdexcept>

#include "fieldsim/errors.hpp"
#include "fieldsim/json_util.hpp"

namespace fieldsim::logsync {

void NodeClock::validate() const {
  if (!(std::abs(drift_ppm) <= 1000.0)) throw std::invalid_argument("NodeClock: |drift| must be <= 1000 ppm");
  if (!std::isfinite(offset_s)) throw std::invalid_argument("NodeClock: offset must be finite");
}

sim::SimTime local_time(const NodeClock& clock, sim::SimTime true_t) {
  const double t = static_cast<double>(true_t.micros);
  return sim::SimTime{std::llround(t + clock.offset_s * 1e6 + clock.drift_ppm * 1e-6 * t)};
}

sim::SimTime ClockEstimate::to_true(sim::SimTime local) const {
  const double l = static_cast<double>(local.micros);
  return sim::SimTime{std::llround(anchor_true_us + (l - anchor_local_us) / rate)};
}

ClockEstimate estimate_clock(std::string_view node_id, std::span<const GpsTimeFix> fixes) {
  double n = 0.0;
  double mean_g = 0.0;
  double mean_l = 0.0;
  for (const auto& f : fixes) {
    if (f.node_id != node_id) continue;
    n += 1.0;
    mean_g += static_cast<double>(f.gps_time.micros);
    mean_l += static_cast<double>(f.local_time_at_fix.micros);
  }
  if (n == 0.0) throw NoFixAvailable("no GPS time fix for node " + std::string(node_id));
  mean_g /= n;
  mean_l /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& f : fixes) {
    if (f.node_id != node_id) continue;
    const double dg = static_cast<double>(f.gps_time.micros) - mean_g;
    const double dl = static_cast<double>(f.local_time_at_fix.micros) - mean_l;
    sxx += dg * dg;
    sxy += dg * dl;
  }
  ClockEstimate est;
  est.rate = sxx > 0.0 ? sxy / sxx : 1.0;
  est.anchor_true_us = mean_g;
  est.anchor_local_us = mean_l;
  est.offset_us = mean_l - est.rate * mean_g;
  return est;
}

sim::SimTime correct(const LogRecord& record, std::span<const GpsTimeFix> fixes) {
  return estimate_clock(record.node_id, fixes).to_true(record.local_time);
}

MergedLog merge_logs(const std::map<std::string, std::vector<LogRecord>>& logs,
                     std::span<const GpsTimeFix> fixes) {
  MergedLog merged;
  for (const auto& [node, records] : logs) {
    const auto est = estimate_clock(node, fixes);
    for (std::size_t i = 0; i < records.size(); ++i) {
      merged.push_back({records[i], est.to_true(records[i].local_time), i});
    }
  }
  std::sort(merged.begin(), merged.end(), [](const MergedEntry& a, const MergedEntry& b) {
    if (a.estimated_true != b.estimated_true) return a.estimated_true < b.estimated_true;
    if (a.record.node_id != b.record.node_id) return a.record.node_id < b.record.node_id;
    return a.sequence < b.sequence;
  });
  return merged;
}

std::vector<LogRecord> read_log_jsonl(std::istream& in) {
  std::vector<LogRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto path = "line " + std::to_string(lineno);
    const auto j = json_util::parse_text(line, path);
    LogRecord r;
    r.node_id = json_util::require<std::string>(j, "node_id", path);
    r.local_time = sim::SimTime{json_util::require<std::int64_t>(j, "local_time_us", path)};
    r.kind = json_util::optional<std::string>(j, "kind", path, "");
    r.payload = j.value("payload", nlohmann::json{});
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<GpsTimeFix> fixes_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigInvalid("fixes", "must be an array");
  std::vector<GpsTimeFix> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = json_util::index("fixes", i);
    out.push_back({json_util::require<std::string>(j[i], "node_id", p),
                   sim::SimTime{json_util::require<std::int64_t>(j[i], "gps_time_us", p)},
                   sim::SimTime{json_util::require<std::int64_t>(j[i], "local_time_us", p)}});
  }
  return out;
}

nlohmann::json to_json(const LogRecord& r) {
  return {{"node_id", r.node_id}, {"local_time_us", r.local_time.micros}, {"kind", r.kind}, {"payload", r.payload}};
}

nlohmann::json to_json(const MergedEntry& e) {
  auto j = to_json(e.record);
  j["true_time_us"] = e.estimated_true.micros;
  j["sequence"] = e.sequence;
  return j;
}

}  // namespace fieldsim::logsync
