#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fieldsim/sim/rng.hpp"
#include "fieldsim/world/mission.hpp"

// Independent reference implementations used to check the library.
namespace fieldsim::testing {

struct SampledWindow {
  std::int64_t first_us;
  std::int64_t last_us;
};

// Steps position_at every `step_us` over [0, horizon_us] and groups the
// in-range samples into runs.
std::vector<SampledWindow> brute_force_windows(const world::Mission& mission, const world::Position& target,
                                               double range, std::int64_t horizon_us,
                                               std::int64_t step_us = 1000);

// Degree-2 least squares via the 3x3 normal equations in long double and
// Cramer's rule.
struct Coeffs {
  long double a;
  long double b;
  long double c;
};
Coeffs normal_equation_fit(std::span<const std::pair<double, double>> points);

// 1 up to r_reliable, 0 from r_max, linear in between.
double linear_ramp(double d, double r_reliable, double r_max);

// Random waypoint mission inside a 400 m square, 2-6 waypoints, altitude
// 5-60 m, speed 1-15 m/s, occasional loiter.
world::Mission random_mission(sim::RngStream& rng);

// Closed-form chord time of a straight pass at `altitude`, lateral `offset`
// from the target: 2 * sqrt(range^2 - altitude^2 - offset^2) / speed.
double chord_time(double range, double altitude, double offset, double speed);

}  // namespace fieldsim::testing
