#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "fieldsim/sim/event.hpp"
#include "fieldsim/sim/rng.hpp"
#include "fieldsim/sim/trace.hpp"

namespace fieldsim::sim {

// Single-threaded discrete-event engine. Events run in (time, id) order; ids
// are assigned at schedule time in insertion order, so simultaneous events
// execute first-come first-served.
class Simulator {
 public:
  // The handler may annotate the event's payload before it is committed to the
  // trace, and may schedule further events.
  using Handler = std::function<void(Event&, Simulator&)>;

  explicit Simulator(std::uint64_t seed = 0, std::string scenario_hash = {});

  void set_handler(Handler handler) { handler_ = std::move(handler); }

  // Throws SchedulingInPast if `event.time` is earlier than now(). Any id on
  // the incoming event is ignored and replaced.
  std::uint64_t schedule(Event event);
  std::uint64_t schedule(SimTime time, std::string node_id, EventKind kind,
                         nlohmann::json payload = {});

  // Executes every pending event with time <= t_end, then sets the clock to
  // t_end. Returns the events executed by this call.
  EventTrace run_until(SimTime t_end);

  SimTime now() const { return clock_; }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t seed() const { return seed_; }

  // Per-node stream derived from (seed, node id); created on first use.
  RngStream& rng(const std::string& node_id);

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const { return executes_before(b, a); }
  };

  std::uint64_t seed_;
  std::string scenario_hash_;
  SimTime clock_{};
  std::uint64_t next_id_ = 1;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::map<std::string, RngStream, std::less<>> streams_;
  Handler handler_;
};

}  // namespace fieldsim::sim
