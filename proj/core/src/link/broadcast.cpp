#include "fieldsim/link/broadcast.hpp"

#include "fieldsim/errors.hpp"
#include "fieldsim/json_util.hpp"

namespace fieldsim::link {

using json_util::join;

void BroadcastParams::validate(std::string_view path) const {
  if (!(beacon_interval_s > 0.0)) throw ConfigInvalid(join(path, "beacon_interval_s"), "must be > 0");
  if (max_payload <= 0 || max_payload > kMaxBroadcastPayload) {
    throw ConfigInvalid(join(path, "max_payload"), "must lie in [1, 250]");
  }
  if (dedupe_window == 0) throw ConfigInvalid(join(path, "dedupe_window"), "must be >= 1");
}

bool DedupeWindow::contains(const std::string& origin, std::uint64_t msg_id) const {
  return members_.contains(Key{origin, msg_id});
}

bool DedupeWindow::insert(const std::string& origin, std::uint64_t msg_id) {
  Key key{origin, msg_id};
  if (members_.contains(key)) return false;
  order_.push_back(key);
  members_.insert(std::move(key));
  if (order_.size() > capacity_) {
    members_.erase(order_.front());
    order_.pop_front();
  }
  return true;
}

BroadcastChannel::BroadcastChannel(BroadcastParams params) : params_(params) {
  params_.validate();
}

std::vector<std::string> BroadcastChannel::deliver(const DataMessage& msg,
                                                   const world::Position& sender_pos,
                                                   const radio::RadioConfig& sender_radio,
                                                   std::span<const BroadcastReceiver> receivers,
                                                   const radio::PropagationModel& model,
                                                   sim::RngStream& rng) {
  if (msg.payload_len > params_.max_payload) {
    throw PayloadTooLarge("payload of " + std::to_string(msg.payload_len) + " bytes exceeds " +
                          std::to_string(params_.max_payload));
  }
  std::vector<std::string> delivered;
  for (const auto& rx : receivers) {
    const double u = rng.next_uniform();
    const double p = radio::reception_prob(world::distance(sender_pos, rx.position), sender_radio,
                                           rx.radio, model);
    if (!(u < p)) continue;
    auto it = windows_.find(rx.node_id);
    if (it == windows_.end()) it = windows_.emplace(rx.node_id, DedupeWindow(params_.dedupe_window)).first;
    if (it->second.insert(msg.origin, msg.msg_id)) {
      delivered.push_back(rx.node_id);
    } else {
      ++duplicates_;
    }
  }
  return delivered;
}

BroadcastParams broadcast_params_from_json(const nlohmann::json& j, std::string_view path) {
  BroadcastParams p;
  p.beacon_interval_s = json_util::optional<double>(j, "beacon_interval_s", path, p.beacon_interval_s);
  p.max_payload = json_util::optional<int>(j, "max_payload", path, p.max_payload);
  p.dedupe_window = json_util::optional<std::size_t>(j, "dedupe_window", path, p.dedupe_window);
  p.validate(path);
  return p;
}

nlohmann::json to_json(const BroadcastParams& p) {
  return {{"beacon_interval_s", p.beacon_interval_s},
          {"max_payload", p.max_payload},
          {"dedupe_window", p.dedupe_window}};
}

}  // namespace fieldsim::link
