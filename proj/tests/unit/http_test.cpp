#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <sstream>
#include <thread>

#include "fieldsim/gs/http_server.hpp"
#include "temp_dir.hpp"

namespace fieldsim::gs {
namespace {

using nlohmann::json;
using namespace std::chrono_literals;

class HttpServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server.emplace(gs, HttpServerOptions{"127.0.0.1", 0, 8});
    ASSERT_TRUE(server->bind());
    server->start();
    client.emplace("127.0.0.1", server->port());
    client->set_read_timeout(5, 0);
  }
  void TearDown() override {
    gs.shutdown();
    server->stop();
  }

  json post(const std::string& path, const std::string& body, int expect_status = 200) {
    auto res = client->Post(path, body, "application/x-ndjson");
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect_status) << path << " " << res->body;
    return json::parse(res->body);
  }

  json get(const std::string& path, int expect_status = 200) {
    auto res = client->Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect_status) << path << " " << res->body;
    return json::parse(res->body);
  }

  testing::TempDir dir{"http"};
  GroundStation gs{GroundStationOptions{dir.path(), std::nullopt}};
  std::optional<HttpServer> server;
  std::optional<httplib::Client> client;
};

std::string telemetry_line(const std::string& node, std::int64_t ts, double battery = 0.5) {
  return json{{"type", "telemetry"},
              {"node_id", node},
              {"ts_gps", ts},
              {"position", {{"x", 1}, {"y", 2}, {"z", 3}}},
              {"battery_fraction", battery}}
             .dump();
}

// Reads NDJSON lines from a streaming GET until `done` says stop.
class StreamReader {
 public:
  StreamReader(int port, std::string path) : client_("127.0.0.1", port) {
    client_.set_read_timeout(10, 0);
    thread_ = std::thread([this, path] {
      client_.Get(path, [this](const char* data, std::size_t len) {
        std::lock_guard lock(mu_);
        buffer_.append(data, len);
        std::size_t nl;
        while ((nl = buffer_.find('\n')) != std::string::npos) {
          lines_.push_back(json::parse(buffer_.substr(0, nl)));
          buffer_.erase(0, nl + 1);
        }
        cv_.notify_all();
        return !stop_;
      });
      std::lock_guard lock(mu_);
      finished_ = true;
      cv_.notify_all();
    });
  }
  ~StreamReader() {
    stop_ = true;
    client_.stop();
    if (thread_.joinable()) thread_.join();
  }

  // Waits until at least n lines arrived; returns a copy.
  std::vector<json> wait_for(std::size_t n, std::chrono::milliseconds timeout = 5000ms) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return lines_.size() >= n || finished_; });
    return lines_;
  }

  bool finished() {
    std::lock_guard lock(mu_);
    return finished_;
  }

 private:
  httplib::Client client_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::string buffer_;
  std::vector<json> lines_;
  std::atomic<bool> stop_{false};
  bool finished_ = false;
};

TEST_F(HttpServerTest, RunsLifecycle) {
  EXPECT_EQ(post("/telemetry", telemetry_line("uav1", 1), 409)["error"], "NoActiveRun");
  const auto created = post("/runs", R"({"name":"field day"})", 201);
  EXPECT_EQ(created["run_id"], "run-0001");
  const auto runs = get("/runs");
  EXPECT_EQ(runs["active"], "run-0001");
  EXPECT_EQ(runs["runs"].size(), 1u);
}

TEST_F(HttpServerTest, TelemetryBatchAndRecordsPaging) {
  post("/runs", "{}", 201);
  std::string body;
  for (int i = 0; i < 250; ++i) body += telemetry_line(i % 2 ? "uav1" : "uav2", i) + "\n";
  EXPECT_EQ(post("/telemetry", body)["results"].size(), 250u);

  std::uint64_t after = 0;
  std::size_t total = 0;
  int pages = 0;
  for (;;) {
    const auto page = get("/runs/run-0001/records?limit=100&after=" + std::to_string(after));
    total += page["records"].size();
    ++pages;
    if (!page["has_more"].get<bool>()) break;
    after = page["next_after"];
  }
  EXPECT_EQ(pages, 3);
  EXPECT_EQ(total, 250u);
  EXPECT_EQ(get("/runs/run-0001/records?node=uav1&limit=1000")["records"].size(), 125u);
  EXPECT_EQ(get("/runs/run-0001/records?from=10&to=20")["records"].size(), 10u);
  EXPECT_TRUE(get("/runs/run-0001/records?from=10&to=10")["records"].empty());
  EXPECT_EQ(get("/runs/nope/records", 404)["error"], "UnknownRun");
}

TEST_F(HttpServerTest, MalformedBodiesAreRejectedWithField) {
  post("/runs", "{}", 201);
  const auto bad = post("/telemetry", telemetry_line("uav1", 1, 1.5), 400);
  EXPECT_EQ(bad["error"], "MalformedMessage");
  EXPECT_EQ(bad["field"], "battery_fraction");
  EXPECT_EQ(post("/telemetry", "{oops", 400)["error"], "MalformedMessage");
  EXPECT_TRUE(get("/runs/run-0001/records")["records"].empty());
}

TEST_F(HttpServerTest, CommandsWithoutVehicles) {
  post("/runs", "{}", 201);
  EXPECT_EQ(post("/commands", R"({"targets":"all","action":"stop"})", 422)["error"], "NoTargetsResolved");
}

TEST_F(HttpServerTest, OperatorStreamSeesHelloThenRecords) {
  post("/runs", "{}", 201);
  StreamReader reader(server->port(), "/stream?session=op1");
  const auto hello = reader.wait_for(1);
  ASSERT_FALSE(hello.empty());
  EXPECT_EQ(hello[0]["type"], "hello");
  EXPECT_EQ(hello[0]["session_id"], "op1");
  EXPECT_EQ(hello[0]["run_id"], "run-0001");
  post("/telemetry", telemetry_line("uav1", 5));
  const auto lines = reader.wait_for(2);
  ASSERT_GE(lines.size(), 2u);
  EXPECT_EQ(lines[1]["seq"], 1);
  EXPECT_EQ(lines[1]["node_id"], "uav1");
}

TEST_F(HttpServerTest, ExternalVehicleReceivesCommandsAndAcks) {
  post("/runs", "{}", 201);
  StreamReader vehicle(server->port(), "/stream?vehicle=ext1");
  ASSERT_FALSE(vehicle.wait_for(1).empty());
  for (int i = 0; i < 50 && get("/vehicles")["vehicles"].empty(); ++i) std::this_thread::sleep_for(20ms);
  EXPECT_EQ(get("/vehicles")["vehicles"][0]["node_id"], "ext1");

  const auto result =
      post("/commands", R"({"cmd_id":"c1","targets":["ext1"],"action":"goto","waypoint":{"x":5,"y":5,"z":10}})");
  ASSERT_EQ(result["acks"].size(), 1u);
  EXPECT_EQ(result["acks"][0]["status"], "accepted");
  const auto lines = vehicle.wait_for(2);
  ASSERT_GE(lines.size(), 2u);
  EXPECT_EQ(lines[1]["type"], "command");
  EXPECT_EQ(lines[1]["cmd_id"], "c1");

  post("/acks", R"({"cmd_id":"c1","node_id":"ext1","status":"completed","at":7})");
  EXPECT_EQ(get("/runs/run-0001/records?kind=ack")["records"].size(), 2u);
  EXPECT_EQ(post("/acks", R"({"cmd_id":"zzz","node_id":"ext1","status":"completed"})", 400)["field"], "cmd_id");
}

TEST_F(HttpServerTest, DuplicateVehicleStreamIsConflict) {
  gs.attach_vehicle("taken", nullptr);
  const auto res = client->Get("/stream?vehicle=taken");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
  gs.detach_vehicle("taken");
}

TEST_F(HttpServerTest, MessagesEndpointRoutesMixedTypes) {
  post("/runs", "{}", 201);
  const std::string body = telemetry_line("uav1", 1) + "\n" + telemetry_line("uav1", 0) + "\n";
  EXPECT_EQ(post("/messages", body)["results"].size(), 2u);
  const auto recs = get("/runs/run-0001/records")["records"];
  EXPECT_EQ(recs[1]["flags"][0], "ts_out_of_order");
}

TEST(HttpServerBind, PortInUseFails) {
  testing::TempDir dir("bind");
  GroundStation gs({dir.path(), std::nullopt});
  HttpServer first(gs, {"127.0.0.1", 0, 2});
  ASSERT_TRUE(first.bind());
  HttpServer second(gs, {"127.0.0.1", first.port(), 2});
  EXPECT_FALSE(second.bind());
}

}  // namespace
}  // namespace fieldsim::gs
