#include "fieldsim/world/mission.hpp"

#include <algorithm>

#include "fieldsim/errors.hpp"
#include "fieldsim/json_util.hpp"

namespace fieldsim::world {

using json_util::join;

double Mission::duration_s() const {
  if (waypoints.empty()) return 0.0;
  return Trajectory(*this).duration_s();
}

void Mission::validate(std::string_view path) const {
  if (waypoints.empty()) throw ConfigInvalid(join(path, "waypoints"), "needs at least one waypoint");
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (!is_valid(waypoints[i])) {
      throw ConfigInvalid(json_util::index(join(path, "waypoints"), i),
                          "coordinates must be finite with z >= 0");
    }
  }
  if (!(speed > 0.0) || !std::isfinite(speed)) throw ConfigInvalid(join(path, "speed"), "must be > 0");
  if (!(loiter_s >= 0.0)) throw ConfigInvalid(join(path, "loiter_s"), "must be >= 0");
  if (endurance_limit_s) {
    if (!(*endurance_limit_s > 0.0)) {
      throw ConfigInvalid(join(path, "endurance_limit_s"), "must be > 0");
    }
    if (duration_s() > *endurance_limit_s) {
      throw ConfigInvalid(join(path, "endurance_limit_s"),
                          "mission lasts " + std::to_string(duration_s()) +
                              " s, beyond the endurance limit");
    }
  }
}

Trajectory::Trajectory(const Mission& mission) {
  if (mission.waypoints.empty()) return;
  start_ = end_ = mission.waypoints.front();
  double t = 0.0;
  for (std::size_t i = 1; i < mission.waypoints.size(); ++i) {
    const auto& from = mission.waypoints[i - 1];
    const auto& to = mission.waypoints[i];
    const double travel = distance(from, to) / mission.speed;
    if (travel > 0.0) {
      legs_.push_back({t, t + travel, from, to});
      t += travel;
    }
    if (mission.loiter_s > 0.0) {
      legs_.push_back({t, t + mission.loiter_s, to, to});
      t += mission.loiter_s;
    }
  }
  end_ = mission.waypoints.back();
  duration_s_ = t;
}

Position Trajectory::position_at(double t_s) const {
  if (legs_.empty() || t_s <= 0.0) return start_;
  if (t_s >= duration_s_) return end_;
  auto it = std::upper_bound(legs_.begin(), legs_.end(), t_s,
                             [](double t, const Leg& leg) { return t < leg.t1; });
  if (it == legs_.end()) return end_;
  const double span = it->t1 - it->t0;
  const double f = span > 0.0 ? (t_s - it->t0) / span : 1.0;
  return it->from + (it->to - it->from) * f;
}

Position position_at(const Mission& mission, sim::SimTime t) {
  return Trajectory(mission).position_at(t);
}

Mission serpentine_sweep(const FieldBounds& bounds, double altitude, double lane_spacing,
                         double speed) {
  Mission m;
  m.speed = speed;
  bool eastward = true;
  for (double y = lane_spacing / 2.0; y <= bounds.height; y += lane_spacing) {
    const double x0 = eastward ? 0.0 : bounds.width;
    const double x1 = eastward ? bounds.width : 0.0;
    m.waypoints.push_back({x0, y, altitude});
    m.waypoints.push_back({x1, y, altitude});
    eastward = !eastward;
  }
  return m;
}

nlohmann::json to_json(const Mission& m) {
  nlohmann::json j;
  j["waypoints"] = nlohmann::json::array();
  for (const auto& w : m.waypoints) j["waypoints"].push_back(to_json(w));
  j["speed"] = m.speed;
  j["loiter_s"] = m.loiter_s;
  if (m.endurance_limit_s) j["endurance_limit_s"] = *m.endurance_limit_s;
  return j;
}

Mission mission_from_json(const nlohmann::json& j, std::string_view path, const FieldBounds& bounds) {
  Mission m;
  if (j.is_object() && j.contains("serpentine")) {
    const auto sp = join(path, "serpentine");
    const auto& s = j.at("serpentine");
    const double altitude = json_util::require<double>(s, "altitude", sp);
    const double spacing = json_util::require<double>(s, "lane_spacing", sp);
    const double speed = json_util::require<double>(s, "speed", sp);
    if (!(altitude >= 0.0)) throw ConfigInvalid(join(sp, "altitude"), "must be >= 0");
    if (!(spacing > 0.0)) throw ConfigInvalid(join(sp, "lane_spacing"), "must be > 0");
    if (!(speed > 0.0)) throw ConfigInvalid(join(sp, "speed"), "must be > 0");
    m = serpentine_sweep(bounds, altitude, spacing, speed);
  } else {
    const auto& wps = json_util::require_node(j, "waypoints", path);
    const auto wp_path = join(path, "waypoints");
    if (!wps.is_array()) throw ConfigInvalid(wp_path, "must be an array");
    for (std::size_t i = 0; i < wps.size(); ++i) {
      m.waypoints.push_back(position_from_json(wps[i], json_util::index(wp_path, i)));
    }
    m.speed = json_util::optional<double>(j, "speed", path, 5.0);
  }
  m.loiter_s = json_util::optional<double>(j, "loiter_s", path, 0.0);
  if (j.contains("endurance_limit_s")) {
    m.endurance_limit_s = json_util::require<double>(j, "endurance_limit_s", path);
  }
  m.validate(path);
  return m;
}

}  // namespace fieldsim::world
