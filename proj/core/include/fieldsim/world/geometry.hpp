#pragma once

#include <cmath>

#include <nlohmann/json.hpp>

namespace fieldsim::world {

// Local East-North-Up frame in meters; z is height above ground.
struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline Position operator+(const Position& a, const Position& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Position operator-(const Position& a, const Position& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Position operator*(const Position& a, double k) { return {a.x * k, a.y * k, a.z * k}; }
inline double dot(const Position& a, const Position& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double distance(const Position& a, const Position& b) {
  const auto d = a - b;
  return std::sqrt(dot(d, d));
}

inline bool is_valid(const Position& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z) && p.z >= 0.0;
}

enum class Orientation { kVertical, kHorizontal };

// Rectangular field anchored at the origin. The default is ~10 ha.
struct FieldBounds {
  double width = 316.2;
  double height = 316.2;

  double area() const { return width * height; }
  bool contains(const Position& p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
};

nlohmann::json to_json(const Position& p);
Position position_from_json(const nlohmann::json& j, std::string_view path);
const char* to_string(Orientation o);
Orientation orientation_from_json(const nlohmann::json& j, std::string_view path);
FieldBounds bounds_from_json(const nlohmann::json& j, std::string_view path);

}  // namespace fieldsim::world
