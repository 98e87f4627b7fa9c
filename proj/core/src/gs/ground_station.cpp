#include "fieldsim/gs/ground_station.hpp"

#include <algorithm>
#include <cstdio>

#include "fieldsim/errors.hpp"

namespace fieldsim::gs {

namespace fs = std::filesystem;

namespace {

std::int64_t wall_clock_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::optional<std::int64_t> record_time(const nlohmann::json& m) {
  for (const char* key : {"ts_gps", "issued_at", "at"}) {
    if (auto it = m.find(key); it != m.end() && it->is_number_integer()) return it->get<std::int64_t>();
  }
  return std::nullopt;
}

bool record_matches_node(const nlohmann::json& m, const std::set<std::string>& nodes) {
  if (nodes.empty()) return true;
  if (auto it = m.find("node_id"); it != m.end()) return nodes.contains(it->get<std::string>());
  if (auto it = m.find("targets"); it != m.end()) {
    if (it->is_string()) return true;
    for (const auto& t : *it) {
      if (nodes.contains(t.get<std::string>())) return true;
    }
  }
  return false;
}

}  // namespace

void Session::push(nlohmann::json message) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(std::move(message));
  }
  cv_.notify_one();
}

std::optional<nlohmann::json> Session::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  auto m = std::move(queue_.front());
  queue_.pop_front();
  return m;
}

std::vector<nlohmann::json> Session::drain() {
  std::lock_guard lock(mu_);
  std::vector<nlohmann::json> out(std::make_move_iterator(queue_.begin()),
                                  std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

void Session::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Session::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

nlohmann::json to_json(const RecordPage& p) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : p.records) records.push_back(to_json(r));
  return {{"records", records}, {"next_after", p.next_after}, {"has_more", p.has_more}};
}

GroundStation::GroundStation(GroundStationOptions options) : options_(std::move(options)) {}

GroundStation::~GroundStation() {
  try {
    shutdown();
  } catch (const std::exception&) {
  }
}

std::string GroundStation::create_run(nlohmann::json meta) {
  std::lock_guard lock(mu_);
  std::error_code ec;
  fs::create_directories(options_.runs_dir, ec);
  std::string run_id;
  for (int n = 1;; ++n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run-%04d", n);
    if (!fs::exists(options_.runs_dir / buf)) {
      run_id = buf;
      break;
    }
  }
  if (!meta.is_object()) meta = nlohmann::json::object();
  if (!meta.contains("start_time_us")) meta["start_time_us"] = wall_clock_us();
  if (active_) active_->flush();
  active_.emplace(RunStore::create(options_.runs_dir, run_id, std::move(meta)));
  last_ts_.clear();
  known_cmds_.clear();
  return run_id;
}

std::optional<std::string> GroundStation::active_run() const {
  std::lock_guard lock(mu_);
  if (!active_) return std::nullopt;
  return active_->run_id();
}

std::vector<std::string> GroundStation::list_runs() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(options_.runs_dir, ec)) {
    if (entry.is_directory()) out.push_back(entry.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunStore& GroundStation::active_locked() {
  if (!active_) throw NoActiveRun("no active run; create one first");
  return *active_;
}

std::uint64_t GroundStation::append_locked(nlohmann::json message, std::vector<std::string> flags) {
  auto& store = active_locked();
  const auto seq = store.append(message, flags);
  auto out = std::move(message);
  out["seq"] = seq;
  out["run_id"] = store.run_id();
  if (!flags.empty()) out["flags"] = flags;
  for (const auto& s : sessions_) s->push(out);
  return seq;
}

void GroundStation::fault(std::string_view point) {
  if (fault_hook_) fault_hook_(point);
}

std::uint64_t GroundStation::ingest_telemetry(TelemetryMessage msg) {
  if (msg.battery_fraction < 0.0 || msg.battery_fraction > 1.0) {
    throw MalformedMessage("battery_fraction", "must be within [0, 1]");
  }
  if (msg.node_id.empty()) throw MalformedMessage("node_id", "must not be empty");
  if (options_.origin && !msg.lat) annotate_geo(msg, *options_.origin);
  std::lock_guard lock(mu_);
  active_locked();
  std::vector<std::string> flags;
  auto [it, fresh] = last_ts_.try_emplace(msg.node_id, msg.ts_gps_us);
  if (!fresh) {
    if (msg.ts_gps_us < it->second) {
      flags.push_back("ts_out_of_order");
    } else {
      it->second = msg.ts_gps_us;
    }
  }
  last_telemetry_[msg.node_id] = msg;
  return append_locked(to_json(msg), std::move(flags));
}

std::uint64_t GroundStation::record_ack(const Ack& ack) {
  std::lock_guard lock(mu_);
  active_locked();
  if (!known_cmds_.contains(ack.cmd_id)) throw MalformedMessage("cmd_id", "unknown command " + ack.cmd_id);
  auto a = ack;
  if (a.at_us == 0) a.at_us = wall_clock_us();
  return append_locked(to_json(a));
}

std::vector<Ack> GroundStation::dispatch_command(Command cmd) {
  std::vector<std::pair<std::string, std::shared_ptr<VehicleLink>>> resolved;
  std::vector<Ack> acks;
  {
    std::lock_guard lock(mu_);
    active_locked();
    if (cmd.cmd_id.empty()) {
      do {
        cmd.cmd_id = "cmd-" + std::to_string(next_cmd_++);
      } while (known_cmds_.contains(cmd.cmd_id));
    } else if (known_cmds_.contains(cmd.cmd_id)) {
      throw MalformedMessage("cmd_id", "duplicate command id " + cmd.cmd_id);
    }
    if (cmd.issued_at_us == 0) cmd.issued_at_us = wall_clock_us();

    std::vector<std::string> unknown;
    if (cmd.target_all) {
      for (const auto& [id, link] : links_) resolved.emplace_back(id, link);
    } else {
      for (const auto& id : cmd.targets) {
        if (auto it = links_.find(id); it != links_.end()) {
          resolved.emplace_back(id, it->second);
        } else {
          unknown.push_back(id);
        }
      }
    }
    if (resolved.empty()) throw NoTargetsResolved("command targets resolve to no connected vehicle");

    known_cmds_.insert(cmd.cmd_id);
    append_locked(to_json(cmd));
    fault("after_persist_command");
    for (const auto& id : unknown) acks.push_back({cmd.cmd_id, id, AckStatus::kRejected, "unknown vehicle", 0});
  }

  // Forwarding happens outside the lock so a vehicle may call back into the
  // service while handling the command.
  for (const auto& [id, link] : resolved) {
    Ack ack{cmd.cmd_id, id, AckStatus::kAccepted, "", 0};
    try {
      link->deliver(cmd);
    } catch (const VehicleUnreachable& e) {
      ack.status = AckStatus::kRejected;
      ack.detail = e.what();
    }
    acks.push_back(std::move(ack));
  }

  std::lock_guard lock(mu_);
  for (auto& ack : acks) {
    ack.at_us = wall_clock_us();
    if (active_) append_locked(to_json(ack));
  }
  return acks;
}

nlohmann::json GroundStation::handle_message(const nlohmann::json& message) {
  switch (message_type(message)) {
    case MessageType::kTelemetry:
      return {{"seq", ingest_telemetry(telemetry_from_json(message))}};
    case MessageType::kAck:
      return {{"seq", record_ack(ack_from_json(message))}};
    case MessageType::kCommand: {
      nlohmann::json acks = nlohmann::json::array();
      for (const auto& a : dispatch_command(command_from_json(message))) acks.push_back(to_json(a));
      return {{"acks", acks}};
    }
    case MessageType::kHello:
    case MessageType::kBye:
      return nlohmann::json::object();
  }
  return nlohmann::json::object();
}

RecordPage GroundStation::query_run(const std::string& run_id, const RecordFilter& filter) const {
  std::unique_lock lock(mu_);
  std::optional<RunStore> reopened;
  const RunStore* store = nullptr;
  if (active_ && active_->run_id() == run_id) {
    store = &*active_;
  } else {
    if (run_id.find('/') != std::string::npos || run_id.find("..") != std::string::npos) {
      throw UnknownRun("unknown run: " + run_id);
    }
    reopened.emplace(RunStore::open(options_.runs_dir, run_id));
    store = &*reopened;
  }

  RecordPage page;
  page.next_after = filter.after;
  const auto& records = store->records();
  auto it = std::upper_bound(records.begin(), records.end(), filter.after,
                             [](std::uint64_t v, const StoredRecord& r) { return v < r.seq; });
  for (; it != records.end(); ++it) {
    const auto& m = it->message;
    bool match = record_matches_node(m, filter.nodes);
    if (match && !filter.kinds.empty()) match = filter.kinds.contains(m.value("type", ""));
    if (match && (filter.from_us || filter.to_us)) {
      const auto t = record_time(m);
      match = t && (!filter.from_us || *t >= *filter.from_us) && (!filter.to_us || *t < *filter.to_us);
    }
    if (!match) {
      page.next_after = it->seq;
      continue;
    }
    if (page.records.size() == filter.limit) {
      page.has_more = true;
      break;
    }
    page.records.push_back(*it);
    page.next_after = it->seq;
  }
  return page;
}

std::shared_ptr<Session> GroundStation::subscribe(std::string session_id) {
  std::lock_guard lock(mu_);
  if (session_id.empty()) session_id = "session-" + std::to_string(next_session_++);
  auto s = std::make_shared<Session>(std::move(session_id));
  s->push(to_json(Hello{s->id(), "operator", active_ ? active_->run_id() : ""}));
  sessions_.push_back(s);
  return s;
}

void GroundStation::unsubscribe(const std::shared_ptr<Session>& session) {
  std::lock_guard lock(mu_);
  std::erase(sessions_, session);
  session->close();
}

void GroundStation::attach_vehicle(const std::string& node_id, std::shared_ptr<VehicleLink> link) {
  std::lock_guard lock(mu_);
  if (!links_.try_emplace(node_id, std::move(link)).second) {
    throw DuplicateVehicleId("vehicle already attached: " + node_id);
  }
}

void GroundStation::detach_vehicle(const std::string& node_id) {
  std::lock_guard lock(mu_);
  links_.erase(node_id);
}

std::vector<VehicleInfo> GroundStation::vehicles() const {
  std::lock_guard lock(mu_);
  std::vector<VehicleInfo> out;
  for (const auto& [id, link] : links_) {
    VehicleInfo v{id, std::nullopt};
    if (auto it = last_telemetry_.find(id); it != last_telemetry_.end()) v.last_telemetry = it->second;
    out.push_back(std::move(v));
  }
  return out;
}

void GroundStation::set_fault_hook(std::function<void(std::string_view)> hook) {
  std::lock_guard lock(mu_);
  fault_hook_ = std::move(hook);
}

void GroundStation::shutdown(const std::string& reason) {
  std::lock_guard lock(mu_);
  if (active_) active_->flush();
  for (const auto& s : sessions_) {
    s->push(to_json(Bye{s->id(), reason}));
    s->close();
  }
  sessions_.clear();
}

}  // namespace fieldsim::gs
