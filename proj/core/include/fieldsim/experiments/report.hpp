#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fieldsim/experiments/collection.hpp"
#include "fieldsim/experiments/reference.hpp"
#include "fieldsim/experiments/sweep.hpp"

namespace fieldsim::experiments {

struct ComparisonRow {
  std::string sensor_id;
  double measured = 0.0;
  double reference = 0.0;
  // measured - reference
  double abs_delta = 0.0;
  // abs_delta / reference; empty when the reference is zero.
  std::optional<double> rel_delta;
  // Zero in the reference series but non-zero in the measurement.
  bool divergent = false;
  // Zero at every altitude of the reference (protocol, source).
  bool dead_in_reference = false;
};

struct ComparisonReport {
  SeriesKey key;
  std::vector<ComparisonRow> rows;
  double measured_total = 0.0;
  double reference_total = 0.0;
  double total_delta = 0.0;
  std::optional<double> total_rel_delta;

  bool all_deltas_zero() const;
};

// Rows follow the reference sensor order S1..S10; sensors missing from the
// measurement count as zero. Throws UnknownSeries.
ComparisonReport compare(const CollectionMetrics& metrics, const ReferenceDataset& ref, const SeriesKey& key);

// A reference series dressed as run metrics.
CollectionMetrics metrics_from_reference(const ReferenceDataset& ref, const SeriesKey& key);

std::string format_table(const ComparisonReport& report);
// Throws IoFailure.
void write_csv(const ComparisonReport& report, const std::filesystem::path& path);

// Chart data: one row per (series, sensor) with header "series,sensor,count".
// Throws EmptyInput (nothing written) for an empty input, IoFailure on write.
void emit_chart_data(std::span<const CollectionMetrics> series, const std::filesystem::path& path);
// One row per stop; fit coefficients in a leading "# fit" comment line.
void emit_chart_data(const SweepResult& sweep, const std::filesystem::path& path);

std::string series_label(const CollectionMetrics& m);

}  // namespace fieldsim::experiments
