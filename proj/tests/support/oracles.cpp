#include "oracles.hpp"

#include <cmath>

namespace fieldsim::testing {

std::vector<SampledWindow> brute_force_windows(const world::Mission& mission, const world::Position& target,
                                               double range, std::int64_t horizon_us, std::int64_t step_us) {
  const world::Trajectory traj(mission);
  std::vector<SampledWindow> out;
  bool open = false;
  for (std::int64_t t = 0; t <= horizon_us; t += step_us) {
    const auto p = traj.position_at(static_cast<double>(t) * 1e-6);
    const bool in = world::distance(p, target) <= range;
    if (in && !open) out.push_back({t, t});
    if (in) out.back().last_us = t;
    open = in;
  }
  return out;
}

Coeffs normal_equation_fit(std::span<const std::pair<double, double>> points) {
  long double s[5] = {0, 0, 0, 0, 0};
  long double t[3] = {0, 0, 0};
  for (const auto& [x, y] : points) {
    long double xp = 1;
    for (int k = 0; k < 5; ++k) {
      s[k] += xp;
      if (k < 3) t[k] += xp * y;
      xp *= x;
    }
  }
  auto det3 = [](long double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  long double m[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
  const long double d = det3(m);
  long double r[3];
  for (int col = 0; col < 3; ++col) {
    long double mc[3][3];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) mc[i][j] = j == col ? t[i] : m[i][j];
    }
    r[col] = det3(mc) / d;
  }
  return {r[0], r[1], r[2]};
}

double linear_ramp(double d, double r_reliable, double r_max) {
  if (d <= r_reliable) return 1.0;
  if (d >= r_max) return 0.0;
  return (r_max - d) / (r_max - r_reliable);
}

world::Mission random_mission(sim::RngStream& rng) {
  world::Mission m;
  const int n = 2 + static_cast<int>(rng.next_uniform() * 5);
  for (int i = 0; i < n; ++i) {
    m.waypoints.push_back({rng.next_uniform(0, 400), rng.next_uniform(0, 400), rng.next_uniform(5, 60)});
  }
  m.speed = rng.next_uniform(1, 15);
  if (rng.next_uniform() < 0.3) m.loiter_s = rng.next_uniform(0, 20);
  return m;
}

double chord_time(double range, double altitude, double offset, double speed) {
  const double h2 = range * range - altitude * altitude - offset * offset;
  return h2 <= 0.0 ? 0.0 : 2.0 * std::sqrt(h2) / speed;
}

}  // namespace fieldsim::testing
