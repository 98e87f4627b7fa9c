#include "fieldsim/world/layout.hpp"

#include <set>
#include <utility>

#include "fieldsim/errors.hpp"
#include "fieldsim/json_util.hpp"

namespace fieldsim::world {

using json_util::join;

const Sensor* SensorLayout::find(std::string_view id) const {
  for (const auto& s : sensors) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

Sensor* SensorLayout::find(std::string_view id) {
  return const_cast<Sensor*>(std::as_const(*this).find(id));
}

void SensorLayout::validate(const FieldBounds& bounds, std::string_view path) const {
  std::set<std::string, std::less<>> seen;
  const auto sp = join(path, "sensors");
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const auto& s = sensors[i];
    const auto p = json_util::index(sp, i);
    if (s.id.empty()) throw ConfigInvalid(join(p, "id"), "must not be empty");
    if (!seen.insert(s.id).second) throw ConfigInvalid(join(p, "id"), "duplicate sensor id " + s.id);
    if (!is_valid(s.position)) throw ConfigInvalid(join(p, "position"), "must be finite with z >= 0");
    if (!bounds.contains(s.position)) throw ConfigInvalid(join(p, "position"), "outside field bounds");
    if (!(s.antenna_height >= 0.0)) throw ConfigInvalid(join(p, "antenna_height"), "must be >= 0");
  }
}

SensorLayout generate_layout(int n, const FieldBounds& bounds, sim::RngStream& rng,
                             const LayoutOptions& options) {
  if (n < 1) throw std::invalid_argument("generate_layout: n must be >= 1");
  SensorLayout layout;
  const double min_sep2 = options.min_separation * options.min_separation;
  int rejected = 0;
  while (static_cast<int>(layout.sensors.size()) < n) {
    const Position candidate{rng.next_uniform() * bounds.width, rng.next_uniform() * bounds.height, 0.0};
    bool clear = true;
    for (const auto& s : layout.sensors) {
      const double dx = s.position.x - candidate.x;
      const double dy = s.position.y - candidate.y;
      if (dx * dx + dy * dy < min_sep2) {
        clear = false;
        break;
      }
    }
    if (!clear) {
      if (++rejected >= options.max_rejections) {
        throw LayoutInfeasible("placed " + std::to_string(layout.sensors.size()) + " of " +
                               std::to_string(n) + " sensors before " +
                               std::to_string(options.max_rejections) + " rejections");
      }
      continue;
    }
    Sensor s;
    s.id = "S" + std::to_string(layout.sensors.size() + 1);
    s.position = candidate;
    s.antenna_height = options.antenna_height;
    layout.sensors.push_back(std::move(s));
  }
  return layout;
}

nlohmann::json to_json(const SensorLayout& layout) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : layout.sensors) {
    arr.push_back({{"id", s.id},
                   {"position", to_json(s.position)},
                   {"antenna_height", s.antenna_height},
                   {"orientation", to_string(s.orientation)},
                   {"enabled", s.enabled}});
  }
  return {{"sensors", arr}};
}

SensorLayout layout_from_json(const nlohmann::json& j, std::string_view path) {
  SensorLayout layout;
  const auto& arr = json_util::require_node(j, "sensors", path);
  const auto sp = join(path, "sensors");
  if (!arr.is_array()) throw ConfigInvalid(sp, "must be an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto p = json_util::index(sp, i);
    const auto& e = arr[i];
    Sensor s;
    s.id = json_util::require<std::string>(e, "id", p);
    s.position = position_from_json(json_util::require_node(e, "position", p), join(p, "position"));
    s.antenna_height = json_util::optional<double>(e, "antenna_height", p, 0.1);
    if (e.contains("orientation")) s.orientation = orientation_from_json(e.at("orientation"), join(p, "orientation"));
    s.enabled = json_util::optional<bool>(e, "enabled", p, true);
    layout.sensors.push_back(std::move(s));
  }
  return layout;
}

}  // namespace fieldsim::world
