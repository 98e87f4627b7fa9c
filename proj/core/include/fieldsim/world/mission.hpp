#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/sim/time.hpp"
#include "fieldsim/world/geometry.hpp"

namespace fieldsim::world {

// Constant-speed waypoint plan. After arriving at each waypoint past the
// first, the vehicle holds for `loiter_s`. Turns are instantaneous. A single
// waypoint describes a stationary vehicle.
struct Mission {
  std::vector<Position> waypoints;
  double speed = 5.0;
  double loiter_s = 0.0;
  std::optional<double> endurance_limit_s;

  bool stationary() const { return waypoints.size() == 1; }
  double duration_s() const;
  // Throws ConfigInvalid (with `path` prefix) if any invariant is broken.
  void validate(std::string_view path = "mission") const;
};

// Piecewise-linear timeline precomputed from a Mission; O(log n) lookup.
class Trajectory {
 public:
  struct Leg {
    double t0;
    double t1;
    Position from;
    Position to;
  };

  explicit Trajectory(const Mission& mission);

  Position position_at(double t_s) const;
  Position position_at(sim::SimTime t) const { return position_at(t.seconds()); }
  double duration_s() const { return duration_s_; }
  const std::vector<Leg>& legs() const { return legs_; }
  const Position& start() const { return start_; }
  const Position& end() const { return end_; }

 private:
  std::vector<Leg> legs_;
  Position start_;
  Position end_;
  double duration_s_ = 0.0;
};

Position position_at(const Mission& mission, sim::SimTime t);

// Back-and-forth lanes parallel to the x axis covering `bounds`, first lane at
// y = lane_spacing / 2.
Mission serpentine_sweep(const FieldBounds& bounds, double altitude, double lane_spacing,
                         double speed);

nlohmann::json to_json(const Mission& m);
// Accepts either explicit {"waypoints": [...], "speed": ...} or a generator
// {"serpentine": {"altitude", "lane_spacing", "speed"}} laid out over `bounds`.
Mission mission_from_json(const nlohmann::json& j, std::string_view path, const FieldBounds& bounds);

}  // namespace fieldsim::world
