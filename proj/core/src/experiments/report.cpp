#include "fieldsim/experiments/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fieldsim/errors.hpp"

namespace fieldsim::experiments {
namespace {

std::string fmt_num(double v) {
  char buf[64];
  if (v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", v);
  }
  return buf;
}

std::string fmt_rel(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoFailure("write failed for " + path.string());
}

}  // namespace

bool ComparisonReport::all_deltas_zero() const {
  return total_delta == 0.0 &&
         std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.abs_delta == 0.0; });
}

ComparisonReport compare(const CollectionMetrics& metrics, const ReferenceDataset& ref, const SeriesKey& key) {
  const auto& series = ref.at(key);
  const auto dead = dead_sensors(ref, key.protocol, key.source);
  ComparisonReport report;
  report.key = key;
  for (std::size_t i = 0; i < kReferenceSensors; ++i) {
    ComparisonRow row;
    row.sensor_id = reference_sensor_id(i);
    row.measured = static_cast<double>(metrics.count(row.sensor_id));
    row.reference = series.counts[i];
    row.abs_delta = row.measured - row.reference;
    if (row.reference != 0.0) row.rel_delta = row.abs_delta / row.reference;
    row.divergent = row.reference == 0.0 && row.measured != 0.0;
    row.dead_in_reference = std::find(dead.begin(), dead.end(), row.sensor_id) != dead.end();
    report.measured_total += row.measured;
    report.reference_total += row.reference;
    report.rows.push_back(std::move(row));
  }
  report.total_delta = report.measured_total - report.reference_total;
  if (report.reference_total != 0.0) report.total_rel_delta = report.total_delta / report.reference_total;
  return report;
}

CollectionMetrics metrics_from_reference(const ReferenceDataset& ref, const SeriesKey& key) {
  const auto& series = ref.at(key);
  CollectionMetrics m;
  m.protocol = key.protocol;
  m.altitude_m = key.altitude_m;
  m.speed_mps = 5.0;
  m.scenario_hash = "reference:" + key.str();
  for (std::size_t i = 0; i < kReferenceSensors; ++i) {
    const auto c = static_cast<std::uint64_t>(series.counts[i]);
    m.per_sensor.push_back({reference_sensor_id(i), c, c, 0});
  }
  return m;
}

std::string format_table(const ComparisonReport& report) {
  std::ostringstream out;
  char line[160];
  out << "reference series " << report.key.str() << "\n";
  std::snprintf(line, sizeof line, "%-8s %10s %10s %10s %10s  %s\n", "sensor", "measured", "reference",
                "delta", "rel", "flags");
  out << line;
  for (const auto& r : report.rows) {
    std::string flags;
    if (r.divergent) flags += "divergent ";
    if (r.dead_in_reference) flags += "dead-in-reference";
    std::snprintf(line, sizeof line, "%-8s %10s %10s %10s %10s  %s\n", r.sensor_id.c_str(),
                  fmt_num(r.measured).c_str(), fmt_num(r.reference).c_str(), fmt_num(r.abs_delta).c_str(),
                  fmt_rel(r.rel_delta).c_str(), flags.c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "%-8s %10s %10s %10s %10s\n", "total", fmt_num(report.measured_total).c_str(),
                fmt_num(report.reference_total).c_str(), fmt_num(report.total_delta).c_str(),
                fmt_rel(report.total_rel_delta).c_str());
  out << line;
  return out.str();
}

void write_csv(const ComparisonReport& report, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "series,sensor,measured,reference,abs_delta,rel_delta,divergent,dead_in_reference\n";
  for (const auto& r : report.rows) {
    out << report.key.str() << ',' << r.sensor_id << ',' << fmt_num(r.measured) << ',' << fmt_num(r.reference)
        << ',' << fmt_num(r.abs_delta) << ',' << fmt_rel(r.rel_delta) << ',' << (r.divergent ? 1 : 0) << ','
        << (r.dead_in_reference ? 1 : 0) << '\n';
  }
  check_written(out, path);
}

std::string series_label(const CollectionMetrics& m) {
  return m.protocol + "@" + fmt_num(m.altitude_m) + "m";
}

void emit_chart_data(std::span<const CollectionMetrics> series, const std::filesystem::path& path) {
  const bool empty = std::all_of(series.begin(), series.end(),
                                 [](const CollectionMetrics& m) { return m.per_sensor.empty(); });
  if (empty) throw EmptyInput("no collection metrics to chart");
  auto out = open_for_write(path);
  out << "series,sensor,count\n";
  for (const auto& m : series) {
    const auto label = series_label(m);
    for (const auto& s : m.per_sensor) out << label << ',' << s.sensor_id << ',' << s.delivered << '\n';
  }
  check_written(out, path);
}

void emit_chart_data(const SweepResult& sweep, const std::filesystem::path& path) {
  if (sweep.stops.empty()) throw EmptyInput("no sweep stops to chart");
  auto out = open_for_write(path);
  char line[256];
  std::snprintf(line, sizeof line, "# fit a=%.17g b=%.17g c=%.17g\n", sweep.fit.a, sweep.fit.b, sweep.fit.c);
  out << line;
  out << "distance_m,mean_rate_bps";
  for (int r = 0; r < sweep.reps; ++r) out << ",rep" << (r + 1) << "_bps";
  const bool udp = sweep.mode == SweepMode::kUdp;
  if (udp) out << ",loss_fraction,stable";
  out << '\n';
  for (const auto& s : sweep.stops) {
    std::snprintf(line, sizeof line, "%.17g,%.17g", s.distance_m, s.mean_rate_bps);
    out << line;
    for (double r : s.rep_rates_bps) {
      std::snprintf(line, sizeof line, ",%.17g", r);
      out << line;
    }
    if (udp) {
      std::snprintf(line, sizeof line, ",%.17g,%d", s.loss_fraction.value_or(0.0), s.stable.value_or(false) ? 1 : 0);
      out << line;
    }
    out << '\n';
  }
  check_written(out, path);
}

}  // namespace fieldsim::experiments
