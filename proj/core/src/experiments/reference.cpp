#include "fieldsim/experiments/reference.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "fieldsim/errors.hpp"
#include "fieldsim/json_util.hpp"

namespace fieldsim::experiments {

std::string SeriesKey::str() const { return protocol + "/" + source + "/" + std::to_string(altitude_m); }

SeriesKey SeriesKey::parse(std::string_view text) {
  SeriesKey key;
  std::string_view alt;
  if (const auto at = text.find('@'); at != std::string_view::npos && text.find('/') == std::string_view::npos) {
    // Short form "protocol@20m" names the field series.
    key = {std::string(text.substr(0, at)), "field", 0};
    alt = text.substr(at + 1);
  } else {
    const auto a = text.find('/');
    const auto b = a == std::string_view::npos ? a : text.find('/', a + 1);
    if (a == std::string_view::npos || b == std::string_view::npos) {
      throw UnknownSeries("series key must look like protocol/source/altitude or protocol@altitude, got \"" +
                          std::string(text) + "\"");
    }
    key = {std::string(text.substr(0, a)), std::string(text.substr(a + 1, b - a - 1)), 0};
    alt = text.substr(b + 1);
  }
  if (key.protocol.empty() || key.source.empty()) {
    throw UnknownSeries("empty protocol or source in series key \"" + std::string(text) + "\"");
  }
  if (alt.ends_with('m')) alt.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(alt.data(), alt.data() + alt.size(), key.altitude_m);
  if (ec != std::errc{} || ptr != alt.data() + alt.size()) {
    throw UnknownSeries("bad altitude in series key \"" + std::string(text) + "\"");
  }
  return key;
}

int ReferenceSeries::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

const ReferenceSeries& ReferenceDataset::at(const SeriesKey& key) const {
  for (const auto& s : series) {
    if (s.key == key) return s;
  }
  throw UnknownSeries("no reference series " + key.str());
}

bool ReferenceDataset::contains(const SeriesKey& key) const {
  return std::any_of(series.begin(), series.end(), [&](const ReferenceSeries& s) { return s.key == key; });
}

std::uint64_t ReferenceDataset::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < kReferenceSensors; ++i) {
      feed(s.key.str() + "|" + reference_sensor_id(i) + "|" + std::to_string(s.counts[i]) + "\n");
    }
  }
  return h;
}

std::string reference_sensor_id(std::size_t index) { return "S" + std::to_string(index + 1); }

const ReferenceDataset& embedded_reference() {
  static const ReferenceDataset kDataset{
      {
          {{"mesh", "field", 20}, {89, 178, 0, 76, 63, 54, 44, 70, 108, 134}},
          {{"mesh", "field", 35}, {48, 17, 0, 9, 46, 27, 14, 91, 4, 76}},
          {{"mesh", "field", 50}, {4, 1, 0, 0, 18, 1, 0, 0, 0, 2}},
          {{"broadcast", "field", 20}, {110, 60, 45, 79, 36, 87, 86, 4, 49, 29}},
          {{"broadcast", "sim", 20}, {197, 184, 298, 372, 237, 172, 228, 183, 219, 156}},
          {{"broadcast", "field", 35}, {155, 167, 36, 189, 76, 138, 126, 51, 66, 78}},
          {{"broadcast", "sim", 35}, {174, 204, 287, 415, 258, 117, 187, 203, 220, 129}},
          {{"broadcast", "field", 50}, {128, 75, 33, 167, 23, 83, 118, 4, 49, 60}},
          {{"broadcast", "sim", 50}, {206, 226, 272, 377, 247, 177, 194, 202, 223, 112}},
      },
      "Broadcast series are stored exactly as plotted; that chart's axis is labeled "
      "x10^-1 while the accompanying text describes 10x more messages than mesh. "
      "No rescaling is applied.",
      "Plotted bar coordinates of the Wi-Fi mesh and broadcast (802.15.4 / ESP-NOW) "
      "collection campaigns, 10 ground sensors, flights at 5 m/s.",
  };
  return kDataset;
}

std::vector<std::string> dead_sensors(const ReferenceDataset& ref, std::string_view protocol,
                                      std::string_view source) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kReferenceSensors; ++i) {
    bool any_series = false;
    bool all_zero = true;
    for (const auto& s : ref.series) {
      if (s.key.protocol != protocol || s.key.source != source) continue;
      any_series = true;
      all_zero = all_zero && s.counts[i] == 0;
    }
    if (any_series && all_zero) out.push_back(reference_sensor_id(i));
  }
  return out;
}

ReferenceDataset reference_from_json(const nlohmann::json& j) {
  ReferenceDataset ref;
  ref.scale_note = json_util::optional<std::string>(j, "scale_note", "", "");
  ref.provenance = json_util::optional<std::string>(j, "provenance", "", "");
  const auto& arr = json_util::require_node(j, "series", "");
  if (!arr.is_array()) throw ConfigInvalid("series", "must be an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto p = json_util::index("series", i);
    ReferenceSeries s;
    s.key.protocol = json_util::require<std::string>(arr[i], "protocol", p);
    s.key.source = json_util::require<std::string>(arr[i], "source", p);
    s.key.altitude_m = json_util::require<int>(arr[i], "altitude_m", p);
    const auto& counts = json_util::require_node(arr[i], "counts", p);
    for (std::size_t k = 0; k < kReferenceSensors; ++k) {
      const auto id = reference_sensor_id(k);
      s.counts[k] = json_util::require<int>(counts, id, json_util::join(p, "counts"));
    }
    ref.series.push_back(std::move(s));
  }
  return ref;
}

nlohmann::json to_json(const ReferenceDataset& ref) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& s : ref.series) {
    nlohmann::json counts;
    for (std::size_t k = 0; k < kReferenceSensors; ++k) counts[reference_sensor_id(k)] = s.counts[k];
    series.push_back({{"protocol", s.key.protocol},
                      {"source", s.key.source},
                      {"altitude_m", s.key.altitude_m},
                      {"counts", counts}});
  }
  return {{"scale_note", ref.scale_note}, {"provenance", ref.provenance}, {"series", series}};
}

}  // namespace fieldsim::experiments
