#include "fieldsim/world/contact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fieldsim::world {
namespace {

struct Interval {
  double lo;
  double hi;
};

// Sub-interval of [0, span] where |rel + v*s| <= range, if any.
std::optional<Interval> solve_leg(const Position& rel, const Position& v, double span, double range) {
  const double a = dot(v, v);
  const double c = dot(rel, rel) - range * range;
  if (a == 0.0) {
    if (c <= 0.0) return Interval{0.0, span};
    return std::nullopt;
  }
  const double b = 2.0 * dot(rel, v);
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  // Cancellation-free roots.
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double r1 = q / a;
  double r2 = q != 0.0 ? c / q : r1;
  if (r1 > r2) std::swap(r1, r2);
  const double lo = std::max(0.0, r1);
  const double hi = std::min(span, r2);
  if (lo > hi) return std::nullopt;
  return Interval{lo, hi};
}

}  // namespace

std::vector<ContactWindow> contact_windows(const Trajectory& trajectory, const Position& target,
                                           double range, double horizon_s) {
  if (!(range > 0.0)) throw std::invalid_argument("contact_windows: range must be > 0");
  std::vector<Interval> raw;
  for (const auto& leg : trajectory.legs()) {
    if (leg.t0 >= horizon_s) break;
    const double span = leg.t1 - leg.t0;
    const Position v = span > 0.0 ? (leg.to - leg.from) * (1.0 / span) : Position{};
    if (auto iv = solve_leg(leg.from - target, v, span, range)) {
      raw.push_back({leg.t0 + iv->lo, std::min(horizon_s, leg.t0 + iv->hi)});
    }
  }
  // Hold at the final position until the horizon.
  const double tail_start = trajectory.duration_s();
  if (horizon_s > tail_start && distance(trajectory.end(), target) <= range) {
    raw.push_back({tail_start, horizon_s});
  }

  std::vector<Interval> merged;
  for (const auto& iv : raw) {
    if (iv.hi < iv.lo) continue;
    if (!merged.empty() && iv.lo - merged.back().hi <= 1e-9) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }

  std::vector<ContactWindow> out;
  for (const auto& iv : merged) {
    ContactWindow w{sim::SimTime::from_seconds(iv.lo), sim::SimTime::from_seconds(iv.hi)};
    // Tangential grazes collapse to a point; they carry no contact time.
    if (w.end > w.start || (horizon_s == 0.0 && iv.lo == 0.0)) out.push_back(w);
  }
  return out;
}

std::vector<ContactWindow> contact_windows(const Mission& mission, const Position& target,
                                           double range, std::optional<sim::SimTime> horizon) {
  const Trajectory trajectory(mission);
  double horizon_s = trajectory.duration_s();
  if (horizon) {
    horizon_s = horizon->seconds();
  } else if (mission.stationary() && mission.endurance_limit_s) {
    horizon_s = *mission.endurance_limit_s;
  }
  return contact_windows(trajectory, target, range, horizon_s);
}

}  // namespace fieldsim::world
