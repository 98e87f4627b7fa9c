#pragma once

#include <optional>
#include <vector>

#include "fieldsim/sim/time.hpp"
#include "fieldsim/world/mission.hpp"

namespace fieldsim::world {

struct ContactWindow {
  sim::SimTime start;
  sim::SimTime end;

  sim::SimTime length() const { return end - start; }
  friend bool operator==(const ContactWindow&, const ContactWindow&) = default;
};

// Maximal intervals within [0, horizon] during which the 3-D distance between
// the vehicle and `target` is <= range, solved in closed form per leg.
// The horizon defaults to the mission duration, or the endurance limit for a
// stationary mission. Throws std::invalid_argument when range <= 0.
std::vector<ContactWindow> contact_windows(const Trajectory& trajectory, const Position& target,
                                           double range, double horizon_s);
std::vector<ContactWindow> contact_windows(const Mission& mission, const Position& target,
                                           double range,
                                           std::optional<sim::SimTime> horizon = std::nullopt);

}  // namespace fieldsim::world
