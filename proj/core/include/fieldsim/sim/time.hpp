#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace fieldsim::sim {

// Simulation time in integer microseconds since scenario start. All clocks in
// the simulator are integral so that runs replay bit-identically.
struct SimTime {
  std::int64_t micros = 0;

  constexpr SimTime() = default;
  constexpr explicit SimTime(std::int64_t us) : micros(us) {}

  static constexpr SimTime from_micros(std::int64_t us) { return SimTime{us}; }
  static constexpr SimTime from_millis(std::int64_t ms) { return SimTime{ms * 1000}; }
  // Rounds to the nearest microsecond.
  static SimTime from_seconds(double s) { return SimTime{std::llround(s * 1e6)}; }

  constexpr double seconds() const { return static_cast<double>(micros) * 1e-6; }

  friend constexpr auto operator<=>(SimTime, SimTime) = default;
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.micros + b.micros}; }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime{a.micros - b.micros}; }
  constexpr SimTime& operator+=(SimTime o) {
    micros += o.micros;
    return *this;
  }
};

inline constexpr SimTime kOneSecond{1'000'000};

}  // namespace fieldsim::sim
