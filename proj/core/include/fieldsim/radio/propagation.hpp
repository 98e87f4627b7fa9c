#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/world/geometry.hpp"

namespace fieldsim::radio {

using world::Orientation;

// Hardware families with distinct measured ranges.
enum class RadioClass {
  kWifiPrinted,   // SBC on-board printed antenna, in flight
  kWifiUsb,       // external USB radio and antenna
  kWifiModified,  // on-board radio rewired to an external antenna
  kLrNode,        // low-rate SoC node radio
};

const char* to_string(RadioClass c);
std::optional<RadioClass> radio_class_from_string(std::string_view s);

struct RadioConfig {
  double tx_power_dbm = 11.0;
  Orientation orientation = Orientation::kVertical;
  double mount_height = 2.0;
  RadioClass radio_class = RadioClass::kLrNode;

  void validate(std::string_view path = "radio") const;
};

// Antenna lying flat close to the ground.
inline bool is_degraded(const RadioConfig& c) {
  return c.orientation == Orientation::kHorizontal && c.mount_height < 0.5;
}

// Two-radius reception model for one radio class: certain reception up to
// r_reliable, linear fall-off to zero at r_max. Both radii are scaled by
// orientation_penalty on degraded links.
struct RangeParams {
  double r_max = 0.0;
  double r_reliable = 0.0;
  double orientation_penalty = 1.0;

  void validate(std::string_view path = "range") const;
};

class PropagationModel {
 public:
  PropagationModel() = default;

  void set(RadioClass c, const RangeParams& params);
  bool has(RadioClass c) const { return classes_.contains(c); }
  // Throws MissingAnchor for an uncalibrated class.
  const RangeParams& at(RadioClass c) const;
  const std::map<RadioClass, RangeParams>& classes() const { return classes_; }

  // Parameters governing a link between two radios: the shorter-ranged class.
  const RangeParams& link_params(const RadioConfig& a, const RadioConfig& b) const;

 private:
  std::map<RadioClass, RangeParams> classes_;
};

double effective_range(const RangeParams& params, bool degraded);
double reception_prob(double distance, const RangeParams& params, bool degraded);

double effective_range(const RadioConfig& a, const RadioConfig& b, const PropagationModel& model);
double reception_prob(double distance, const RadioConfig& a, const RadioConfig& b,
                      const PropagationModel& model);

struct RangeAnchor {
  RadioConfig a;
  RadioConfig b;
  double measured_range = 0.0;
};

inline constexpr double kDefaultReliableRatio = 0.8;

// Per class: r_max from the strongest non-degraded anchor, r_reliable =
// reliable_ratio * r_max, and orientation_penalty = degraded / non-degraded
// range when both kinds of anchor are present. With an empty `requested`,
// every class that appears in `anchors` is calibrated.
PropagationModel calibrate(std::span<const RangeAnchor> anchors,
                           std::span<const RadioClass> requested = {},
                           double reliable_ratio = kDefaultReliableRatio);

// Anchor file: [{"radio_class","orientation","height_m","range_m",
// "tx_power_dbm"?}], each entry describing a symmetric pair.
std::vector<RangeAnchor> anchors_from_json(const nlohmann::json& j, std::string_view path = "anchors");
std::vector<RangeAnchor> load_anchors(const std::string& file);
nlohmann::json to_json(std::span<const RangeAnchor> anchors);

RadioConfig radio_config_from_json(const nlohmann::json& j, std::string_view path);
nlohmann::json to_json(const RadioConfig& c);
RangeParams range_params_from_json(const nlohmann::json& j, std::string_view path);
nlohmann::json to_json(const RangeParams& p);

}  // namespace fieldsim::radio

namespace fieldsim::radio {

// Range anchors measured in the field campaign, as symmetric pairs:
// printed SBC antenna in flight 10 m, USB radio 40 m, rewired SBC radio 200 m,
// SoC nodes 180 m with vertical antennas at 2 m and 0.4 m lying at 0.1 m.
// Transmit power is not reported for these and is recorded as 11 dBm.
std::vector<RangeAnchor> field_anchors();

}  // namespace fieldsim::radio
