#include "fieldsim/gs/http_server.hpp"

#include <atomic>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "fieldsim/errors.hpp"

namespace fieldsim::gs {

namespace {

using nlohmann::json;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& kind, const std::string& what,
                 const std::string& field = {}) {
  json body = {{"error", kind}, {"message", what}};
  if (!field.empty()) body["field"] = field;
  reply(res, status, body);
}

// Maps library errors onto HTTP statuses.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const MalformedMessage& e) {
    reply_error(res, 400, "MalformedMessage", e.what(), e.field());
  } catch (const NoActiveRun& e) {
    reply_error(res, 409, "NoActiveRun", e.what());
  } catch (const NoTargetsResolved& e) {
    reply_error(res, 422, "NoTargetsResolved", e.what());
  } catch (const DuplicateVehicleId& e) {
    reply_error(res, 409, "DuplicateVehicleId", e.what());
  } catch (const UnknownRun& e) {
    reply_error(res, 404, "UnknownRun", e.what());
  } catch (const Error& e) {
    reply_error(res, 500, "Error", e.what());
  }
}

std::set<std::string> csv_set(const std::string& s) {
  std::set<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

std::int64_t int_param(const httplib::Request& req, const char* key, std::int64_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto v = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const auto n = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(key);
    return n;
  } catch (const std::exception&) {
    throw MalformedMessage(key, "must be an integer");
  }
}

std::vector<json> body_lines(const std::string& body) {
  std::vector<json> out;
  std::stringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_line(line));
  }
  if (out.empty()) throw MalformedMessage("body", "no message");
  return out;
}

// Command channel to a vehicle connected through GET /stream?vehicle=<id>.
class StreamVehicleLink : public VehicleLink {
 public:
  explicit StreamVehicleLink(std::shared_ptr<Session> session) : session_(std::move(session)) {}

  void deliver(const Command& cmd) override {
    if (session_->closed()) throw VehicleUnreachable(session_->id() + ": stream closed");
    session_->push(to_json(cmd));
  }

 private:
  std::shared_ptr<Session> session_;
};

void stream_session(httplib::Response& res, std::shared_ptr<Session> session,
                    std::function<void()> release) {
  res.set_chunked_content_provider(
      "application/x-ndjson",
      [session](std::size_t, httplib::DataSink& sink) {
        if (!sink.is_writable()) return false;
        auto m = session->pop(std::chrono::milliseconds(200));
        if (m) {
          const auto line = encode_line(*m);
          return sink.write(line.data(), line.size());
        }
        if (session->closed()) sink.done();
        return true;
      },
      [release = std::move(release)](bool) { release(); });
}

}  // namespace

struct HttpServer::Impl {
  Impl(GroundStation& g, HttpServerOptions o) : gs(g), options(std::move(o)) {}

  GroundStation& gs;
  HttpServerOptions options;
  httplib::Server server;
  std::thread thread;
  int bound_port = -1;

  void routes();
};

void HttpServer::Impl::routes() {
  const int threads = options.worker_threads;
  server.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  // httplib's default also sets SO_REUSEPORT, which would let a second
  // service bind the same port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });

  server.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json meta = json::object();
      if (!req.body.empty()) meta = parse_line(req.body);
      if (!meta.is_object()) throw MalformedMessage("body", "run metadata must be an object");
      reply(res, 201, {{"run_id", gs.create_run(meta)}});
    });
  });

  server.Get("/runs", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      const auto active = gs.active_run();
      reply(res, 200, {{"runs", gs.list_runs()}, {"active", active ? json(*active) : json(nullptr)}});
    });
  });

  server.Get(R"(/runs/([^/]+)/records)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      RecordFilter f;
      f.after = static_cast<std::uint64_t>(std::max<std::int64_t>(0, int_param(req, "after", 0)));
      f.limit = static_cast<std::size_t>(std::clamp<std::int64_t>(int_param(req, "limit", 100), 1, 10000));
      if (req.has_param("node")) f.nodes = csv_set(req.get_param_value("node"));
      if (req.has_param("kind")) f.kinds = csv_set(req.get_param_value("kind"));
      if (req.has_param("from")) f.from_us = int_param(req, "from", 0);
      if (req.has_param("to")) f.to_us = int_param(req, "to", 0);
      reply(res, 200, to_json(gs.query_run(req.matches[1], f)));
    });
  });

  server.Get("/vehicles", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json out = json::array();
      for (const auto& v : gs.vehicles()) {
        json entry = {{"node_id", v.node_id}};
        entry["last_telemetry"] = v.last_telemetry ? to_json(*v.last_telemetry) : json(nullptr);
        out.push_back(std::move(entry));
      }
      reply(res, 200, {{"vehicles", out}});
    });
  });

  server.Post("/commands", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto j = parse_line(req.body);
      if (j.is_object() && !j.contains("type")) j["type"] = "command";
      reply(res, 200, gs.handle_message(j));
    });
  });

  auto typed_post = [this](const char* type) {
    return [this, type](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        json results = json::array();
        for (auto& j : body_lines(req.body)) {
          if (j.is_object() && !j.contains("type") && type) j["type"] = type;
          results.push_back(gs.handle_message(j));
        }
        reply(res, 200, {{"results", results}});
      });
    };
  };
  server.Post("/telemetry", typed_post("telemetry"));
  server.Post("/acks", typed_post("ack"));
  server.Post("/messages", typed_post(nullptr));

  server.Get("/stream", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto active = gs.active_run();
      if (req.has_param("vehicle")) {
        const auto node = req.get_param_value("vehicle");
        if (node.empty()) throw MalformedMessage("vehicle", "must not be empty");
        auto session = std::make_shared<Session>("vehicle:" + node);
        gs.attach_vehicle(node, std::make_shared<StreamVehicleLink>(session));
        session->push(to_json(Hello{session->id(), "vehicle", active.value_or("")}));
        stream_session(res, session, [this, node, session] {
          session->close();
          gs.detach_vehicle(node);
        });
        return;
      }
      auto session = gs.subscribe(req.has_param("session") ? req.get_param_value("session") : "");
      stream_session(res, session, [this, session] { gs.unsubscribe(session); });
    });
  });
}

HttpServer::HttpServer(GroundStation& gs, HttpServerOptions options)
    : impl_(std::make_unique<Impl>(gs, std::move(options))) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::bind() {
  if (impl_->options.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(impl_->options.host);
    return impl_->bound_port > 0;
  }
  if (!impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) return false;
  impl_->bound_port = impl_->options.port;
  return true;
}

int HttpServer::port() const { return impl_->bound_port; }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace fieldsim::gs
