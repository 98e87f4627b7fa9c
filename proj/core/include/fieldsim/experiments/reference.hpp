#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace fieldsim::experiments {

// Identifies one plotted series: protocol ("mesh" | "broadcast"), source
// ("field" | "sim") and flight altitude in meters. Text form:
// "mesh/field/20".
struct SeriesKey {
  std::string protocol;
  std::string source;
  int altitude_m = 0;

  std::string str() const;
  // Accepts "mesh/field/20", "mesh/field/20m" and the field shorthand
  // "mesh@20m". Throws UnknownSeries on a malformed key.
  static SeriesKey parse(std::string_view text);
  friend bool operator==(const SeriesKey&, const SeriesKey&) = default;
};

inline constexpr std::size_t kReferenceSensors = 10;

struct ReferenceSeries {
  SeriesKey key;
  // S1..S10.
  std::array<int, kReferenceSensors> counts{};

  int total() const;
};

struct ReferenceDataset {
  std::vector<ReferenceSeries> series;
  std::string scale_note;
  std::string provenance;

  // Throws UnknownSeries.
  const ReferenceSeries& at(const SeriesKey& key) const;
  bool contains(const SeriesKey& key) const;
  std::size_t value_count() const { return series.size() * kReferenceSensors; }
  // Digest over every (key, sensor, value) triple in canonical order.
  std::uint64_t checksum() const;
};

std::string reference_sensor_id(std::size_t index);

// Per-sensor message counts from the two collection campaigns (association
// mesh, field only; connectionless broadcast, field and simulated), flown at
// 5 m/s over the 10-sensor field at 20, 35 and 50 m.
const ReferenceDataset& embedded_reference();

// Sensors whose count is zero in every altitude of (protocol, source).
std::vector<std::string> dead_sensors(const ReferenceDataset& ref, std::string_view protocol,
                                      std::string_view source);

ReferenceDataset reference_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ReferenceDataset& ref);

}  // namespace fieldsim::experiments
