#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "fieldsim/errors.hpp"
#include "fieldsim/experiments/scenario.hpp"
#include "fieldsim/gs/ground_station.hpp"
#include "fieldsim/gs/messages.hpp"
#include "fieldsim/gs/run_store.hpp"
#include "fieldsim/gs/sim_bridge.hpp"
#include "temp_dir.hpp"

namespace fieldsim::gs {
namespace {

using nlohmann::json;
using testing::TempDir;
using namespace std::chrono_literals;

class RecordingLink : public VehicleLink {
 public:
  void deliver(const Command& cmd) override {
    std::lock_guard lock(mu);
    received.push_back(cmd.cmd_id);
  }
  std::mutex mu;
  std::vector<std::string> received;
};

class DeadLink : public VehicleLink {
 public:
  void deliver(const Command&) override { throw VehicleUnreachable("radio silent"); }
};

TelemetryMessage telemetry(const std::string& node, std::int64_t ts, double battery = 0.9) {
  TelemetryMessage m;
  m.node_id = node;
  m.ts_gps_us = ts;
  m.position = {1.0, 2.0, 20.0};
  m.battery_fraction = battery;
  m.counters = {{"S1", 3}};
  m.link_state = "idle";
  return m;
}

Command command(std::vector<std::string> targets, Action action = Action::kStop) {
  Command c;
  c.target_all = targets.empty();
  c.targets = std::move(targets);
  c.action = action;
  c.issued_by = "op";
  c.issued_at_us = 1;
  return c;
}

std::vector<json> non_hello(const std::shared_ptr<Session>& s) {
  std::vector<json> out;
  for (auto& m : s->drain()) {
    if (m["type"] != "hello") out.push_back(std::move(m));
  }
  return out;
}

// ---- messages ----

TEST(Messages, TelemetryRoundTrip) {
  auto m = telemetry("uav1", 42);
  m.lat = 1.5;
  m.lon = -2.5;
  const auto j = to_json(m);
  EXPECT_EQ(j["type"], "telemetry");
  EXPECT_EQ(j["ts_gps"], 42);
  EXPECT_EQ(to_json(telemetry_from_json(j)), j);
}

TEST(Messages, CommandRoundTrip) {
  auto c = command({"a", "b"}, Action::kGoto);
  c.cmd_id = "c1";
  c.waypoint = world::Position{10, 20, 30};
  EXPECT_EQ(to_json(command_from_json(to_json(c))), to_json(c));
  auto all = command({});
  all.cmd_id = "c2";
  EXPECT_EQ(to_json(all)["targets"], "all");
  EXPECT_TRUE(command_from_json(to_json(all)).target_all);
}

TEST(Messages, AckRoundTrip) {
  const Ack a{"c1", "uav1", AckStatus::kCompleted, "done", 99};
  EXPECT_EQ(to_json(ack_from_json(to_json(a))), to_json(a));
}

void expect_malformed(const std::function<void()>& f, const std::string& field) {
  try {
    f();
    FAIL() << "expected MalformedMessage on " << field;
  } catch (const MalformedMessage& e) {
    EXPECT_EQ(e.field(), field);
  }
}

TEST(Messages, ValidationNamesField) {
  auto j = to_json(telemetry("uav1", 1));
  j["battery_fraction"] = 1.5;
  expect_malformed([&] { telemetry_from_json(j); }, "battery_fraction");
  j = to_json(telemetry("uav1", 1));
  j.erase("node_id");
  expect_malformed([&] { telemetry_from_json(j); }, "node_id");
  auto c = to_json(command({"a"}, Action::kStop));
  c["action"] = "goto";
  expect_malformed([&] { command_from_json(c); }, "waypoint");
  c["targets"] = json::array();
  expect_malformed([&] { command_from_json(c); }, "targets");
  expect_malformed([] { message_type(json{{"type", "gossip"}}); }, "type");
  expect_malformed([] { parse_line("{not json"); }, "line");
}

TEST(Messages, EncodeLineIsNewlineTerminated) {
  const auto line = encode_line(json{{"type", "bye"}});
  EXPECT_EQ(line, "{\"type\":\"bye\"}\n");
  EXPECT_EQ(parse_line(line), (json{{"type", "bye"}}));
}

TEST(Messages, GeoAnnotationScale) {
  auto m = telemetry("uav1", 1);
  m.position = {0.0, 111'195.0, 0.0};
  annotate_geo(m, {0.0, 0.0});
  EXPECT_NEAR(*m.lat, 1.0, 1e-3);
  EXPECT_NEAR(*m.lon, 0.0, 1e-12);
}

// ---- run store ----

TEST(RunStoreTest, AppendAndReplay) {
  TempDir dir("store");
  {
    auto store = RunStore::create(dir.path(), "r1", {{"note", "x"}});
    EXPECT_EQ(store.append({{"type", "bye"}}), 1u);
    EXPECT_EQ(store.append({{"type", "bye"}}, {"ts_out_of_order"}), 2u);
  }
  const auto store = RunStore::open(dir.path(), "r1");
  ASSERT_EQ(store.records().size(), 2u);
  EXPECT_EQ(store.records()[1].flags, std::vector<std::string>{"ts_out_of_order"});
  EXPECT_EQ(store.meta()["note"], "x");
  EXPECT_EQ(store.last_seq(), 2u);
}

TEST(RunStoreTest, TornFinalLineIsDiscarded) {
  TempDir dir("torn");
  {
    auto store = RunStore::create(dir.path(), "r1", json::object());
    store.append({{"type", "bye"}});
  }
  {
    std::ofstream out(dir.path() / "r1" / "records.jsonl", std::ios::app);
    out << "{\"seq\":2,\"mess";
  }
  auto store = RunStore::open(dir.path(), "r1");
  EXPECT_EQ(store.last_seq(), 1u);
  EXPECT_EQ(store.append({{"type", "bye"}}), 2u);
  EXPECT_EQ(RunStore::open(dir.path(), "r1").records().size(), 2u);
}

TEST(RunStoreTest, GapIsAnError) {
  TempDir dir("gap");
  RunStore::create(dir.path(), "r1", json::object());
  {
    std::ofstream out(dir.path() / "r1" / "records.jsonl", std::ios::app);
    out << "{\"seq\":1,\"message\":{}}\n{\"seq\":3,\"message\":{}}\n";
  }
  EXPECT_THROW(RunStore::open(dir.path(), "r1"), IoFailure);
}

TEST(RunStoreTest, CreateAndOpenErrors) {
  TempDir dir("errs");
  RunStore::create(dir.path(), "r1", json::object());
  EXPECT_THROW(RunStore::create(dir.path(), "r1", json::object()), IoFailure);
  EXPECT_THROW(RunStore::open(dir.path(), "nope"), UnknownRun);
}

// ---- ground station ----

class GroundStationTest : public ::testing::Test {
 protected:
  TempDir dir{"gs"};
  GroundStation gs{GroundStationOptions{dir.path(), std::nullopt}};
};

TEST_F(GroundStationTest, RequiresActiveRun) {
  EXPECT_THROW(gs.ingest_telemetry(telemetry("uav1", 1)), NoActiveRun);
  gs.attach_vehicle("uav1", std::make_shared<RecordingLink>());
  EXPECT_THROW(gs.dispatch_command(command({})), NoActiveRun);
}

TEST_F(GroundStationTest, RunIdsAndListing) {
  EXPECT_EQ(gs.create_run(), "run-0001");
  EXPECT_EQ(gs.create_run({{"name", "second"}}), "run-0002");
  EXPECT_EQ(gs.active_run(), "run-0002");
  EXPECT_EQ(gs.list_runs(), (std::vector<std::string>{"run-0001", "run-0002"}));
}

TEST_F(GroundStationTest, FanOutToTwoSessionsInSameOrder) {
  gs.create_run();
  auto a = gs.subscribe("a");
  auto b = gs.subscribe("b");
  for (int i = 0; i < 5; ++i) gs.ingest_telemetry(telemetry("uav1", i));
  const auto ma = a->drain();
  const auto mb = b->drain();
  ASSERT_EQ(ma.size(), 6u);
  EXPECT_EQ(ma[0]["type"], "hello");
  EXPECT_EQ(ma[0]["session_id"], "a");
  for (std::size_t i = 1; i < ma.size(); ++i) {
    EXPECT_EQ(ma[i]["seq"], i);
    EXPECT_EQ(ma[i]["seq"], mb[i]["seq"]);
    EXPECT_EQ(ma[i]["run_id"], "run-0001");
  }
}

TEST_F(GroundStationTest, InvalidBatteryIsRejectedAndNotStored) {
  const auto run = gs.create_run();
  expect_malformed([&] { gs.ingest_telemetry(telemetry("uav1", 1, 1.5)); }, "battery_fraction");
  EXPECT_TRUE(gs.query_run(run, {}).records.empty());
}

TEST_F(GroundStationTest, OutOfOrderTimestampIsFlaggedNotDropped) {
  const auto run = gs.create_run();
  gs.ingest_telemetry(telemetry("uav1", 100));
  gs.ingest_telemetry(telemetry("uav1", 50));
  gs.ingest_telemetry(telemetry("uav2", 10));
  const auto page = gs.query_run(run, {});
  ASSERT_EQ(page.records.size(), 3u);
  EXPECT_TRUE(page.records[0].flags.empty());
  EXPECT_EQ(page.records[1].flags, std::vector<std::string>{"ts_out_of_order"});
  EXPECT_TRUE(page.records[2].flags.empty());
}

TEST_F(GroundStationTest, CommandToAllYieldsOneAckPerVehicle) {
  gs.create_run();
  std::vector<std::shared_ptr<RecordingLink>> links;
  for (int i = 0; i < 4; ++i) {
    links.push_back(std::make_shared<RecordingLink>());
    gs.attach_vehicle("uav" + std::to_string(i), links.back());
  }
  const auto acks = gs.dispatch_command(command({}));
  ASSERT_EQ(acks.size(), 4u);
  for (const auto& a : acks) EXPECT_EQ(a.status, AckStatus::kAccepted);
  for (const auto& l : links) EXPECT_EQ(l->received.size(), 1u);
  EXPECT_EQ(acks[0].cmd_id, "cmd-1");
}

TEST_F(GroundStationTest, UnresolvedTargetsPersistNothing) {
  const auto run = gs.create_run();
  gs.attach_vehicle("uav1", std::make_shared<RecordingLink>());
  EXPECT_THROW(gs.dispatch_command(command({"ghost"})), NoTargetsResolved);
  EXPECT_TRUE(gs.query_run(run, {}).records.empty());
}

TEST_F(GroundStationTest, PartialResolutionAndUnreachableVehicles) {
  gs.create_run();
  gs.attach_vehicle("uav1", std::make_shared<RecordingLink>());
  gs.attach_vehicle("uav2", std::make_shared<DeadLink>());
  const auto acks = gs.dispatch_command(command({"uav1", "uav2", "ghost"}));
  std::map<std::string, AckStatus> by_node;
  for (const auto& a : acks) by_node[a.node_id] = a.status;
  EXPECT_EQ(by_node["uav1"], AckStatus::kAccepted);
  EXPECT_EQ(by_node["uav2"], AckStatus::kRejected);
  EXPECT_EQ(by_node["ghost"], AckStatus::kRejected);
}

TEST_F(GroundStationTest, CommandIdsAreUnique) {
  gs.create_run();
  gs.attach_vehicle("uav1", std::make_shared<RecordingLink>());
  auto c = command({});
  c.cmd_id = "mine";
  gs.dispatch_command(c);
  expect_malformed([&] { gs.dispatch_command(c); }, "cmd_id");
  expect_malformed([&] { gs.record_ack({"unknown", "uav1", AckStatus::kCompleted, "", 1}); }, "cmd_id");
  EXPECT_NO_THROW(gs.record_ack({"mine", "uav1", AckStatus::kCompleted, "", 1}));
}

TEST_F(GroundStationTest, ConcurrentWritersProduceOneTotalOrder) {
  const auto run = gs.create_run();
  auto s1 = gs.subscribe();
  auto s2 = gs.subscribe();
  for (int i = 0; i < 4; ++i) gs.attach_vehicle("uav" + std::to_string(i), std::make_shared<RecordingLink>());
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        gs.ingest_telemetry(telemetry("uav" + std::to_string(t), i));
        if (i % 10 == 0) gs.dispatch_command(command({}));
      }
    });
  }
  for (auto& th : threads) th.join();
  const auto a = non_hello(s1);
  const auto b = non_hello(s2);
  // 200 telemetry + 20 commands each with 4 acks.
  ASSERT_EQ(a.size(), 200u + 20u * 5u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]["seq"], i + 1);
    EXPECT_EQ(a[i], b[i]);
  }
  RecordFilter all;
  all.limit = 10'000;
  EXPECT_EQ(gs.query_run(run, all).records.size(), a.size());
}

TEST_F(GroundStationTest, PaginationVisitsEveryRecordOnce) {
  const auto run = gs.create_run();
  for (int i = 0; i < 250; ++i) gs.ingest_telemetry(telemetry("uav1", i));
  RecordFilter f;
  std::vector<std::uint64_t> seen;
  int pages = 0;
  for (;;) {
    const auto page = gs.query_run(run, f);
    ++pages;
    for (const auto& r : page.records) seen.push_back(r.seq);
    if (!page.has_more) break;
    f.after = page.next_after;
  }
  EXPECT_EQ(pages, 3);
  ASSERT_EQ(seen.size(), 250u);
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], i + 1);
}

TEST_F(GroundStationTest, Filters) {
  const auto run = gs.create_run();
  gs.attach_vehicle("uav1", std::make_shared<RecordingLink>());
  for (int i = 0; i < 10; ++i) gs.ingest_telemetry(telemetry(i % 2 ? "uav1" : "uav2", i * 1000));
  gs.dispatch_command(command({"uav1"}));

  RecordFilter f;
  f.from_us = 2000;
  f.to_us = 2000;
  EXPECT_TRUE(gs.query_run(run, f).records.empty());
  f.to_us = 5000;
  EXPECT_EQ(gs.query_run(run, f).records.size(), 3u);

  RecordFilter by_node;
  by_node.nodes = {"uav2"};
  EXPECT_EQ(gs.query_run(run, by_node).records.size(), 5u);
  by_node.nodes = {"uav1"};
  // 5 telemetry, the command and its ack.
  EXPECT_EQ(gs.query_run(run, by_node).records.size(), 7u);

  RecordFilter by_kind;
  by_kind.kinds = {"command", "ack"};
  EXPECT_EQ(gs.query_run(run, by_kind).records.size(), 2u);
}

TEST_F(GroundStationTest, QueryClosedAndUnknownRuns) {
  const auto first = gs.create_run();
  gs.ingest_telemetry(telemetry("uav1", 1));
  gs.create_run();
  EXPECT_EQ(gs.query_run(first, {}).records.size(), 1u);
  EXPECT_THROW(gs.query_run("run-9999", {}), UnknownRun);
  EXPECT_THROW(gs.query_run("../etc", {}), UnknownRun);
}

TEST_F(GroundStationTest, CrashAfterPersistKeepsCommand) {
  const auto run = gs.create_run();
  auto link = std::make_shared<RecordingLink>();
  gs.attach_vehicle("uav1", link);
  gs.set_fault_hook([](std::string_view point) {
    if (point == "after_persist_command") throw std::runtime_error("crash");
  });
  auto c = command({});
  c.cmd_id = "doomed";
  EXPECT_THROW(gs.dispatch_command(c), std::runtime_error);
  EXPECT_TRUE(link->received.empty());
  const auto replay = RunStore::open(dir.path(), run);
  ASSERT_EQ(replay.records().size(), 1u);
  EXPECT_EQ(replay.records()[0].message["cmd_id"], "doomed");
}

TEST_F(GroundStationTest, ShutdownSendsBye) {
  gs.create_run();
  auto s = gs.subscribe("op");
  gs.shutdown("maintenance");
  const auto msgs = s->drain();
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[1]["type"], "bye");
  EXPECT_EQ(msgs[1]["reason"], "maintenance");
  EXPECT_TRUE(s->closed());
  EXPECT_FALSE(s->pop(10ms).has_value());
}

TEST_F(GroundStationTest, HandleMessageRoutesByType) {
  gs.create_run();
  gs.attach_vehicle("uav1", std::make_shared<RecordingLink>());
  EXPECT_EQ(gs.handle_message(to_json(telemetry("uav1", 1)))["seq"], 1);
  const auto r = gs.handle_message({{"type", "command"}, {"targets", "all"}, {"action", "stop"}});
  ASSERT_EQ(r["acks"].size(), 1u);
  EXPECT_THROW(gs.handle_message({{"type", "nonsense"}}), MalformedMessage);
}

TEST_F(GroundStationTest, VehiclesReportLastTelemetry) {
  gs.create_run();
  gs.attach_vehicle("uav1", std::make_shared<RecordingLink>());
  EXPECT_THROW(gs.attach_vehicle("uav1", std::make_shared<RecordingLink>()), DuplicateVehicleId);
  gs.ingest_telemetry(telemetry("uav1", 7));
  const auto v = gs.vehicles();
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].last_telemetry->ts_gps_us, 7);
  gs.detach_vehicle("uav1");
  EXPECT_TRUE(gs.vehicles().empty());
}

TEST(GroundStationGeo, OriginAnnotatesTelemetry) {
  TempDir dir("geo");
  GroundStation gs({dir.path(), GeoOrigin{-22.0, -47.0}});
  const auto run = gs.create_run();
  gs.ingest_telemetry(telemetry("uav1", 1));
  const auto rec = gs.query_run(run, {}).records.at(0);
  EXPECT_TRUE(rec.message.contains("lat"));
  EXPECT_NEAR(rec.message["lat"].get<double>(), -22.0, 1e-3);
}

// ---- simulation bridge ----

experiments::ScenarioConfig four_drone_scenario() {
  auto cfg = experiments::load_scenario(std::filesystem::path(FIELDSIM_DATA_DIR) / "scenarios" /
                                        "canonical_broadcast.json");
  const auto base = cfg.drones.front();
  cfg.drones.clear();
  for (int i = 0; i < 4; ++i) {
    auto d = base;
    d.id = "uav" + std::to_string(i + 1);
    cfg.drones.push_back(d);
  }
  return cfg;
}

class SimBridgeTest : public ::testing::Test {
 protected:
  TempDir dir{"bridge"};
  GroundStation gs{GroundStationOptions{dir.path(), std::nullopt}};
};

TEST_F(SimBridgeTest, AttachRegistersEveryDrone) {
  gs.create_run();
  SimBridge bridge(gs, four_drone_scenario(), 1);
  EXPECT_EQ(bridge.attach(), (std::vector<std::string>{"uav1", "uav2", "uav3", "uav4"}));
  EXPECT_EQ(gs.vehicles().size(), 4u);
  EXPECT_EQ(gs.dispatch_command(command({})).size(), 4u);
}

TEST_F(SimBridgeTest, DuplicateAttachRollsBack) {
  gs.create_run();
  gs.attach_vehicle("uav3", std::make_shared<RecordingLink>());
  SimBridge bridge(gs, four_drone_scenario(), 1);
  EXPECT_THROW(bridge.attach(), DuplicateVehicleId);
  ASSERT_EQ(gs.vehicles().size(), 1u);
  EXPECT_EQ(gs.vehicles()[0].node_id, "uav3");
}

TEST_F(SimBridgeTest, TelemetryFlowsAtPeriod) {
  const auto run = gs.create_run();
  SimBridge bridge(gs, four_drone_scenario(), 1);
  bridge.attach();
  bridge.advance_to(sim::SimTime::from_seconds(9.5));
  RecordFilter f;
  f.nodes = {"uav2"};
  const auto page = gs.query_run(run, f);
  ASSERT_EQ(page.records.size(), 10u);
  for (std::size_t i = 0; i < page.records.size(); ++i) {
    const auto t = telemetry_from_json(page.records[i].message);
    EXPECT_EQ(t.ts_gps_us, static_cast<std::int64_t>(i) * 1'000'000);
    EXPECT_GE(t.battery_fraction, 0.0);
    EXPECT_LE(t.battery_fraction, 1.0);
  }
}

TEST_F(SimBridgeTest, GotoCompletesAtWaypoint) {
  const auto run = gs.create_run();
  SimBridge bridge(gs, four_drone_scenario(), 1);
  bridge.attach();
  bridge.advance_to(sim::SimTime::from_seconds(10));
  auto c = command({"uav1"}, Action::kGoto);
  c.cmd_id = "go";
  c.waypoint = world::Position{100.0, 100.0, 25.0};
  ASSERT_EQ(gs.dispatch_command(c).at(0).status, AckStatus::kAccepted);
  bridge.advance_to(sim::SimTime::from_seconds(200));

  RecordFilter f;
  f.nodes = {"uav1"};
  f.limit = 10'000;
  const auto recs = gs.query_run(run, f).records;
  std::optional<std::uint64_t> completed_seq;
  for (const auto& r : recs) {
    if (r.message["type"] == "ack" && r.message["status"] == "completed") completed_seq = r.seq;
  }
  ASSERT_TRUE(completed_seq.has_value());
  const auto last = telemetry_from_json(recs.back().message);
  EXPECT_NEAR(last.position.x, 100.0, 1e-6);
  EXPECT_NEAR(last.position.y, 100.0, 1e-6);
  EXPECT_NEAR(last.position.z, 25.0, 1e-6);
}

TEST_F(SimBridgeTest, StopHoldsPosition) {
  const auto run = gs.create_run();
  SimBridge bridge(gs, four_drone_scenario(), 1);
  bridge.attach();
  bridge.advance_to(sim::SimTime::from_seconds(30));
  auto c = command({"uav1"});
  c.cmd_id = "halt";
  gs.dispatch_command(c);
  bridge.advance_to(sim::SimTime::from_seconds(40));
  RecordFilter f;
  f.nodes = {"uav1"};
  f.kinds = {"telemetry"};
  f.from_us = 31'000'000;
  const auto recs = gs.query_run(run, f).records;
  ASSERT_GE(recs.size(), 2u);
  const auto first = telemetry_from_json(recs.front().message).position;
  for (const auto& r : recs) EXPECT_EQ(telemetry_from_json(r.message).position, first);
}

TEST_F(SimBridgeTest, DepletedVehicleRejectsCommands) {
  gs.create_run();
  SimBridge bridge(gs, four_drone_scenario(), 1);
  bridge.attach();
  bridge.advance_to(sim::SimTime::from_seconds(1300));
  const auto acks = gs.dispatch_command(command({"uav1"}));
  ASSERT_EQ(acks.size(), 1u);
  EXPECT_EQ(acks[0].status, AckStatus::kRejected);
}

TEST_F(SimBridgeTest, SameScheduleSameRecords) {
  auto record_run = [](const std::filesystem::path& root) {
    GroundStation g({root, std::nullopt});
    const auto run = g.create_run({{"start_time_us", 0}});
    SimBridge bridge(g, four_drone_scenario(), 7);
    bridge.attach();
    bridge.advance_to(sim::SimTime::from_seconds(20));
    auto c = command({"uav2"}, Action::kGoto);
    c.cmd_id = "x";
    c.waypoint = world::Position{50, 50, 20};
    g.dispatch_command(c);
    bridge.advance_to(sim::SimTime::from_seconds(60));
    RecordFilter f;
    f.kinds = {"telemetry"};
    f.limit = 10'000;
    json out = json::array();
    for (const auto& r : g.query_run(run, f).records) out.push_back(r.message);
    return out;
  };
  TempDir a("det-a"), b("det-b");
  EXPECT_EQ(record_run(a.path()), record_run(b.path()));
}

}  // namespace
}  // namespace fieldsim::gs
