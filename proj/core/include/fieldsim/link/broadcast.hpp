#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/radio/propagation.hpp"
#include "fieldsim/sim/rng.hpp"
#include "fieldsim/sim/time.hpp"
#include "fieldsim/world/geometry.hpp"

namespace fieldsim::link {

inline constexpr int kMaxBroadcastPayload = 250;

struct BroadcastParams {
  double beacon_interval_s = 1.0;
  int max_payload = kMaxBroadcastPayload;
  std::size_t dedupe_window = 64;

  void validate(std::string_view path = "broadcast") const;
};

struct DataMessage {
  std::uint64_t msg_id = 0;
  std::string origin;
  sim::SimTime created_at;
  int payload_len = 0;
};

// Remembers the last `capacity` (origin, msg_id) pairs seen by a receiver.
class DedupeWindow {
 public:
  explicit DedupeWindow(std::size_t capacity) : capacity_(capacity) {}

  bool contains(const std::string& origin, std::uint64_t msg_id) const;
  // Returns false if the pair was already in the window.
  bool insert(const std::string& origin, std::uint64_t msg_id);

 private:
  using Key = std::pair<std::string, std::uint64_t>;
  std::size_t capacity_;
  std::deque<Key> order_;
  std::set<Key> members_;
};

struct BroadcastReceiver {
  std::string node_id;
  world::Position position;
  radio::RadioConfig radio;
};

// Connectionless delivery: every receiver independently hears a message with
// probability reception_prob(distance). One uniform draw is consumed per
// receiver regardless of geometry, keeping streams aligned across scenarios
// that share a seed.
class BroadcastChannel {
 public:
  explicit BroadcastChannel(BroadcastParams params);

  // Throws PayloadTooLarge above params.max_payload. Returns receivers that
  // got a fresh copy, in input order; repeats are counted in duplicates().
  std::vector<std::string> deliver(const DataMessage& msg, const world::Position& sender_pos,
                                   const radio::RadioConfig& sender_radio,
                                   std::span<const BroadcastReceiver> receivers,
                                   const radio::PropagationModel& model, sim::RngStream& rng);

  std::uint64_t duplicates() const { return duplicates_; }
  const BroadcastParams& params() const { return params_; }

 private:
  BroadcastParams params_;
  std::map<std::string, DedupeWindow, std::less<>> windows_;
  std::uint64_t duplicates_ = 0;
};

BroadcastParams broadcast_params_from_json(const nlohmann::json& j, std::string_view path);
nlohmann::json to_json(const BroadcastParams& p);

}  // namespace fieldsim::link
