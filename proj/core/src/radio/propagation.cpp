#include "fieldsim/radio/propagation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fieldsim/errors.hpp"
#include "fieldsim/json_util.hpp"

namespace fieldsim::radio {
namespace {

using json_util::join;

constexpr std::array<std::pair<RadioClass, const char*>, 4> kClassNames{{
    {RadioClass::kWifiPrinted, "wifi_printed"},
    {RadioClass::kWifiUsb, "wifi_usb"},
    {RadioClass::kWifiModified, "wifi_modified"},
    {RadioClass::kLrNode, "lr_node"},
}};

}  // namespace

const char* to_string(RadioClass c) {
  for (const auto& [k, name] : kClassNames) {
    if (k == c) return name;
  }
  return "?";
}

std::optional<RadioClass> radio_class_from_string(std::string_view s) {
  for (const auto& [k, name] : kClassNames) {
    if (s == name) return k;
  }
  return std::nullopt;
}

void RadioConfig::validate(std::string_view path) const {
  if (!(tx_power_dbm >= -10.0 && tx_power_dbm <= 30.0)) {
    throw ConfigInvalid(join(path, "tx_power_dbm"), "must lie in [-10, 30]");
  }
  if (!(mount_height >= 0.0)) throw ConfigInvalid(join(path, "mount_height"), "must be >= 0");
}

void RangeParams::validate(std::string_view path) const {
  if (!(r_reliable > 0.0)) throw ConfigInvalid(join(path, "r_reliable"), "must be > 0");
  if (!(r_reliable <= r_max)) throw ConfigInvalid(join(path, "r_reliable"), "must be <= r_max");
  if (!(orientation_penalty > 0.0 && orientation_penalty <= 1.0)) {
    throw ConfigInvalid(join(path, "orientation_penalty"), "must lie in (0, 1]");
  }
}

void PropagationModel::set(RadioClass c, const RangeParams& params) {
  params.validate(std::string("propagation.") + to_string(c));
  classes_[c] = params;
}

const RangeParams& PropagationModel::at(RadioClass c) const {
  auto it = classes_.find(c);
  if (it == classes_.end()) throw MissingAnchor(std::string("no range model for class ") + to_string(c));
  return it->second;
}

const RangeParams& PropagationModel::link_params(const RadioConfig& a, const RadioConfig& b) const {
  const auto& pa = at(a.radio_class);
  const auto& pb = at(b.radio_class);
  return pb.r_max < pa.r_max ? pb : pa;
}

double effective_range(const RangeParams& params, bool degraded) {
  return degraded ? params.r_max * params.orientation_penalty : params.r_max;
}

double reception_prob(double distance, const RangeParams& params, bool degraded) {
  const double scale = degraded ? params.orientation_penalty : 1.0;
  const double r_max = params.r_max * scale;
  const double r_rel = params.r_reliable * scale;
  if (distance <= r_rel) return 1.0;
  if (distance >= r_max) return 0.0;
  return (r_max - distance) / (r_max - r_rel);
}

double effective_range(const RadioConfig& a, const RadioConfig& b, const PropagationModel& model) {
  return effective_range(model.link_params(a, b), is_degraded(a) || is_degraded(b));
}

double reception_prob(double distance, const RadioConfig& a, const RadioConfig& b,
                      const PropagationModel& model) {
  return reception_prob(distance, model.link_params(a, b), is_degraded(a) || is_degraded(b));
}

PropagationModel calibrate(std::span<const RangeAnchor> anchors, std::span<const RadioClass> requested,
                           double reliable_ratio) {
  if (!(reliable_ratio > 0.0 && reliable_ratio <= 1.0)) {
    throw std::invalid_argument("calibrate: reliable_ratio must lie in (0, 1]");
  }
  std::set<RadioClass> classes(requested.begin(), requested.end());
  if (classes.empty()) {
    for (const auto& anchor : anchors) classes.insert(anchor.a.radio_class);
  }
  if (classes.empty()) throw MissingAnchor("no anchors to calibrate from");

  PropagationModel model;
  for (RadioClass c : classes) {
    std::optional<double> clear;
    std::optional<double> degraded;
    for (const auto& anchor : anchors) {
      if (anchor.a.radio_class != c) continue;
      if (anchor.b.radio_class != c) {
        throw std::invalid_argument("calibrate: anchor pairs must share a radio class");
      }
      if (!(anchor.measured_range > 0.0)) throw std::invalid_argument("calibrate: measured_range must be > 0");
      auto& slot = (is_degraded(anchor.a) || is_degraded(anchor.b)) ? degraded : clear;
      slot = std::max(slot.value_or(0.0), anchor.measured_range);
    }
    if (!clear && !degraded) throw MissingAnchor(std::string("no anchor for class ") + to_string(c));

    RangeParams params;
    params.r_max = clear ? *clear : *degraded;
    params.r_reliable = reliable_ratio * params.r_max;
    if (clear && degraded) params.orientation_penalty = std::min(1.0, *degraded / *clear);
    model.set(c, params);
  }
  return model;
}

RadioConfig radio_config_from_json(const nlohmann::json& j, std::string_view path) {
  RadioConfig c;
  c.tx_power_dbm = json_util::optional<double>(j, "tx_power_dbm", path, 11.0);
  if (j.contains("orientation")) c.orientation = world::orientation_from_json(j.at("orientation"), join(path, "orientation"));
  c.mount_height = json_util::optional<double>(j, "mount_height", path, 2.0);
  const auto cls = json_util::optional<std::string>(j, "radio_class", path, "lr_node");
  const auto parsed = radio_class_from_string(cls);
  if (!parsed) throw ConfigInvalid(join(path, "radio_class"), "unknown radio class \"" + cls + "\"");
  c.radio_class = *parsed;
  c.validate(path);
  return c;
}

nlohmann::json to_json(const RadioConfig& c) {
  return {{"tx_power_dbm", c.tx_power_dbm},
          {"orientation", world::to_string(c.orientation)},
          {"mount_height", c.mount_height},
          {"radio_class", to_string(c.radio_class)}};
}

RangeParams range_params_from_json(const nlohmann::json& j, std::string_view path) {
  RangeParams p;
  p.r_max = json_util::require<double>(j, "r_max", path);
  p.r_reliable = json_util::optional<double>(j, "r_reliable", path, kDefaultReliableRatio * p.r_max);
  p.orientation_penalty = json_util::optional<double>(j, "orientation_penalty", path, 1.0);
  p.validate(path);
  return p;
}

nlohmann::json to_json(const RangeParams& p) {
  return {{"r_max", p.r_max}, {"r_reliable", p.r_reliable}, {"orientation_penalty", p.orientation_penalty}};
}

std::vector<RangeAnchor> anchors_from_json(const nlohmann::json& j, std::string_view path) {
  const nlohmann::json& list = j.is_object() ? json_util::require_node(j, "anchors", path) : j;
  if (!list.is_array()) throw ConfigInvalid(std::string(path), "must be an array of anchors");
  std::vector<RangeAnchor> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto p = json_util::index(path, i);
    const auto& e = list[i];
    RadioConfig c;
    const auto cls = json_util::require<std::string>(e, "radio_class", p);
    const auto parsed = radio_class_from_string(cls);
    if (!parsed) throw ConfigInvalid(join(p, "radio_class"), "unknown radio class \"" + cls + "\"");
    c.radio_class = *parsed;
    c.orientation = world::orientation_from_json(json_util::require_node(e, "orientation", p), join(p, "orientation"));
    c.mount_height = json_util::require<double>(e, "height_m", p);
    c.tx_power_dbm = json_util::optional<double>(e, "tx_power_dbm", p, 11.0);
    c.validate(p);
    const double range = json_util::require<double>(e, "range_m", p);
    if (!(range > 0.0)) throw ConfigInvalid(join(p, "range_m"), "must be > 0");
    out.push_back({c, c, range});
  }
  return out;
}

std::vector<RangeAnchor> load_anchors(const std::string& file) {
  return anchors_from_json(json_util::parse_file(file), file);
}

nlohmann::json to_json(std::span<const RangeAnchor> anchors) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : anchors) {
    arr.push_back({{"radio_class", to_string(a.a.radio_class)},
                   {"orientation", world::to_string(a.a.orientation)},
                   {"height_m", a.a.mount_height},
                   {"tx_power_dbm", a.a.tx_power_dbm},
                   {"range_m", a.measured_range}});
  }
  return arr;
}

}  // namespace fieldsim::radio

namespace fieldsim::radio {

std::vector<RangeAnchor> field_anchors() {
  auto pair = [](RadioClass c, Orientation o, double height, double range) {
    RadioConfig cfg{11.0, o, height, c};
    return RangeAnchor{cfg, cfg, range};
  };
  return {
      pair(RadioClass::kWifiPrinted, Orientation::kVertical, 20.0, 10.0),
      pair(RadioClass::kWifiUsb, Orientation::kVertical, 20.0, 40.0),
      pair(RadioClass::kWifiModified, Orientation::kVertical, 10.0, 200.0),
      pair(RadioClass::kLrNode, Orientation::kVertical, 2.0, 180.0),
      pair(RadioClass::kLrNode, Orientation::kHorizontal, 0.1, 0.4),
  };
}

}  // namespace fieldsim::radio
