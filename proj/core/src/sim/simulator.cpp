#include "fieldsim/sim/simulator.hpp"

#include "fieldsim/errors.hpp"

namespace fieldsim::sim {

Simulator::Simulator(std::uint64_t seed, std::string scenario_hash)
    : seed_(seed), scenario_hash_(std::move(scenario_hash)) {}

std::uint64_t Simulator::schedule(Event event) {
  if (event.time < clock_) {
    throw SchedulingInPast("event at t=" + std::to_string(event.time.micros) +
                           "us scheduled with clock at " + std::to_string(clock_.micros) + "us");
  }
  event.id = next_id_++;
  const auto id = event.id;
  queue_.push(std::move(event));
  return id;
}

std::uint64_t Simulator::schedule(SimTime time, std::string node_id, EventKind kind,
                                  nlohmann::json payload) {
  return schedule(Event{0, time, std::move(node_id), kind, std::move(payload)});
}

EventTrace Simulator::run_until(SimTime t_end) {
  if (t_end < clock_) {
    throw SchedulingInPast("run_until target precedes the current clock");
  }
  EventTrace trace;
  trace.seed = seed_;
  trace.scenario_hash = scenario_hash_;
  while (!queue_.empty() && queue_.top().time <= t_end) {
    // priority_queue::top is const; the copy is the price of letting handlers
    // annotate the executed event.
    Event event = queue_.top();
    queue_.pop();
    clock_ = event.time;
    if (handler_) handler_(event, *this);
    trace.events.push_back(std::move(event));
  }
  clock_ = t_end;
  trace.terminal_time = t_end;
  return trace;
}

RngStream& Simulator::rng(const std::string& node_id) {
  auto it = streams_.find(node_id);
  if (it == streams_.end()) {
    it = streams_.emplace(node_id, RngStream(seed_, stream_id_for(node_id))).first;
  }
  return it->second;
}

}  // namespace fieldsim::sim
