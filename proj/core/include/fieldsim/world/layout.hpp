#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/sim/rng.hpp"
#include "fieldsim/world/geometry.hpp"

namespace fieldsim::world {

struct Sensor {
  std::string id;
  Position position;
  double antenna_height = 0.1;
  Orientation orientation = Orientation::kVertical;
  // Dead nodes stay in the layout but never transmit.
  bool enabled = true;
};

struct SensorLayout {
  std::vector<Sensor> sensors;

  const Sensor* find(std::string_view id) const;
  Sensor* find(std::string_view id);
  void validate(const FieldBounds& bounds, std::string_view path = "layout") const;
};

struct LayoutOptions {
  double min_separation = 20.0;
  int max_rejections = 10'000;
  double antenna_height = 0.1;
};

// Rejection-samples `n` sensors ("S1".."Sn") uniformly inside `bounds`,
// keeping pairwise horizontal separation >= min_separation. Throws
// LayoutInfeasible once max_rejections samples have been rejected.
SensorLayout generate_layout(int n, const FieldBounds& bounds, sim::RngStream& rng,
                             const LayoutOptions& options = {});

nlohmann::json to_json(const SensorLayout& layout);
SensorLayout layout_from_json(const nlohmann::json& j, std::string_view path);

}  // namespace fieldsim::world
