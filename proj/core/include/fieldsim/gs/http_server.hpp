#pragma once

#include <memory>
#include <string>

#include "fieldsim/gs/ground_station.hpp"

namespace fieldsim::gs {

struct HttpServerOptions {
  std::string host = "127.0.0.1";
  // 0 picks a free port.
  int port = 8080;
  int worker_threads = 32;
};

// HTTP + NDJSON streaming front end for a GroundStation:
//   POST /runs, GET /runs, GET /runs/{id}/records, GET /vehicles,
//   POST /commands, POST /telemetry, POST /acks, POST /messages,
//   GET /stream (operator session, or ?vehicle=<id> for an external vehicle).
class HttpServer {
 public:
  HttpServer(GroundStation& gs, HttpServerOptions options);
  ~HttpServer();

  // False when the address cannot be bound.
  bool bind();
  int port() const;
  // Serves on a background thread until stop().
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fieldsim::gs
