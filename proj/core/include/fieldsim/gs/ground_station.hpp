#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldsim/gs/messages.hpp"
#include "fieldsim/gs/run_store.hpp"

namespace fieldsim::gs {

// Outbound queue of wire lines for one subscriber. Producers never block.
class Session {
 public:
  explicit Session(std::string id) : id_(std::move(id)) {}

  const std::string& id() const { return id_; }
  void push(nlohmann::json message);
  // Waits up to `timeout`; nullopt on timeout or once closed and drained.
  std::optional<nlohmann::json> pop(std::chrono::milliseconds timeout);
  std::vector<nlohmann::json> drain();
  void close();
  bool closed() const;

 private:
  std::string id_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<nlohmann::json> queue_;
  bool closed_ = false;
};

// Command path to one vehicle. deliver() throws VehicleUnreachable when the
// vehicle cannot take the command right now.
class VehicleLink {
 public:
  virtual ~VehicleLink() = default;
  virtual void deliver(const Command& cmd) = 0;
};

struct RecordFilter {
  std::set<std::string> nodes;
  std::optional<std::int64_t> from_us;
  std::optional<std::int64_t> to_us;
  std::set<std::string> kinds;
  std::uint64_t after = 0;
  std::size_t limit = 100;
};

struct RecordPage {
  std::vector<StoredRecord> records;
  // Resume point for the next page.
  std::uint64_t next_after = 0;
  bool has_more = false;
};

nlohmann::json to_json(const RecordPage& p);

struct VehicleInfo {
  std::string node_id;
  std::optional<TelemetryMessage> last_telemetry;
};

struct GroundStationOptions {
  std::filesystem::path runs_dir = "runs";
  std::optional<GeoOrigin> origin;
};

// Single serialization point for every run mutation. All appends and their
// fan-out to sessions happen under one mutex, so every observer sees the same
// total order.
class GroundStation {
 public:
  explicit GroundStation(GroundStationOptions options);
  ~GroundStation();

  // Starts a new run and makes it active. Returns its id.
  std::string create_run(nlohmann::json meta = nlohmann::json::object());
  std::optional<std::string> active_run() const;
  std::vector<std::string> list_runs() const;

  std::uint64_t ingest_telemetry(TelemetryMessage msg);
  // Records a vehicle ack; MalformedMessage when cmd_id is unknown.
  std::uint64_t record_ack(const Ack& ack);
  // Persists the command, then forwards it to each resolved vehicle and
  // returns the synchronous accepted/rejected acks.
  std::vector<Ack> dispatch_command(Command cmd);
  // Routes any inbound wire object by its "type".
  nlohmann::json handle_message(const nlohmann::json& message);

  RecordPage query_run(const std::string& run_id, const RecordFilter& filter) const;

  // The new session's queue starts with a hello; it then receives every
  // record appended after this call.
  std::shared_ptr<Session> subscribe(std::string session_id = {});
  void unsubscribe(const std::shared_ptr<Session>& session);

  void attach_vehicle(const std::string& node_id, std::shared_ptr<VehicleLink> link);
  void detach_vehicle(const std::string& node_id);
  std::vector<VehicleInfo> vehicles() const;

  // Test hook invoked at named points ("after_persist_command"); throwing
  // from it simulates a crash at that point.
  void set_fault_hook(std::function<void(std::string_view)> hook);

  // Flushes the active run and closes every session with a bye.
  void shutdown(const std::string& reason = "shutdown");

  const GroundStationOptions& options() const { return options_; }

 private:
  std::uint64_t append_locked(nlohmann::json message, std::vector<std::string> flags = {});
  RunStore& active_locked();
  void fault(std::string_view point);

  GroundStationOptions options_;
  mutable std::mutex mu_;
  std::optional<RunStore> active_;
  std::map<std::string, std::int64_t> last_ts_;
  std::set<std::string> known_cmds_;
  std::vector<std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<VehicleLink>> links_;
  std::map<std::string, TelemetryMessage> last_telemetry_;
  std::function<void(std::string_view)> fault_hook_;
  std::uint64_t next_session_ = 1;
  std::uint64_t next_cmd_ = 1;
};

}  // namespace fieldsim::gs
