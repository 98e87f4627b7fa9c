#include "fieldsim/world/geometry.hpp"

#include "fieldsim/json_util.hpp"

namespace fieldsim::world {

using json_util::join;

nlohmann::json to_json(const Position& p) { return {{"x", p.x}, {"y", p.y}, {"z", p.z}}; }

Position position_from_json(const nlohmann::json& j, std::string_view path) {
  Position p{json_util::require<double>(j, "x", path), json_util::require<double>(j, "y", path),
             json_util::optional<double>(j, "z", path, 0.0)};
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
    throw ConfigInvalid(std::string(path), "coordinates must be finite");
  }
  if (p.z < 0.0) throw ConfigInvalid(join(path, "z"), "must be >= 0");
  return p;
}

const char* to_string(Orientation o) { return o == Orientation::kVertical ? "vertical" : "horizontal"; }

Orientation orientation_from_json(const nlohmann::json& j, std::string_view path) {
  const auto s = json_util::get_as<std::string>(j, path);
  if (s == "vertical") return Orientation::kVertical;
  if (s == "horizontal") return Orientation::kHorizontal;
  throw ConfigInvalid(std::string(path), "must be \"vertical\" or \"horizontal\"");
}

FieldBounds bounds_from_json(const nlohmann::json& j, std::string_view path) {
  FieldBounds b{json_util::optional<double>(j, "width", path, 316.2),
                json_util::optional<double>(j, "height", path, 316.2)};
  if (!(b.width > 0.0)) throw ConfigInvalid(join(path, "width"), "must be > 0");
  if (!(b.height > 0.0)) throw ConfigInvalid(join(path, "height"), "must be > 0");
  return b;
}

}  // namespace fieldsim::world
