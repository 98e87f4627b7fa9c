#include "fieldsim/cli/cli.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "fieldsim/errors.hpp"
#include "fieldsim/experiments/collection.hpp"
#include "fieldsim/experiments/reference.hpp"
#include "fieldsim/experiments/report.hpp"
#include "fieldsim/experiments/scenario.hpp"
#include "fieldsim/experiments/sweep.hpp"
#include "fieldsim/gs/ground_station.hpp"
#include "fieldsim/gs/http_server.hpp"
#include "fieldsim/gs/sim_bridge.hpp"
#include "fieldsim/json_util.hpp"
#include "fieldsim/logsync/clock_sync.hpp"

namespace fieldsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMetricsFile = "metrics.json";
constexpr const char* kChartFile = "chart.csv";
constexpr const char* kTraceFile = "trace.jsonl";

std::atomic<bool> g_stop{false};

extern "C" void on_stop_signal(int) { g_stop = true; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoFailure("cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw IoFailure("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<double> altitude;
  std::optional<double> speed;
  std::string out = "out";
};

experiments::ScenarioConfig configure(const RunOptions& o) {
  auto cfg = experiments::load_scenario(o.scenario);
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.reps) {
    if (*o.reps < 1) throw ConfigInvalid("--reps", "must be >= 1");
    cfg.replications = *o.reps;
    cfg.sweep.reps = *o.reps;
  }
  if (o.altitude || o.speed) cfg = experiments::with_flight(cfg, o.altitude, o.speed);
  return cfg;
}

struct CollectionArtifacts {
  std::string metrics_json;
  std::string trace_jsonl;
  experiments::CollectionMetrics aggregate;
};

CollectionArtifacts collect(const experiments::ScenarioConfig& cfg) {
  if (cfg.protocol == experiments::LinkProtocol::kAdhocThroughput) {
    throw ConfigInvalid("link_protocol", "adhoc_throughput scenarios run with `fieldsim sweep`");
  }
  const auto traced = experiments::run_collection_traced(cfg, 0);
  std::vector<experiments::CollectionMetrics> reps{traced.metrics};
  if (cfg.replications > 1) reps = experiments::run_replications(cfg);

  CollectionArtifacts a;
  a.aggregate = experiments::aggregate(reps);
  json per_rep = json::array();
  for (const auto& r : reps) per_rep.push_back(experiments::to_json(r));
  const json doc = {{"scenario", experiments::to_json(cfg)},
                    {"scenario_hash", cfg.hash()},
                    {"trace_hash", traced.trace.hash()},
                    {"aggregate", experiments::to_json(a.aggregate)},
                    {"replications", per_rep}};
  a.metrics_json = doc.dump(2) + "\n";
  a.trace_jsonl = traced.trace.to_jsonl();
  return a;
}

void print_summary(std::ostream& out, const experiments::CollectionMetrics& m, int reps) {
  out << experiments::series_label(m) << "  speed " << m.speed_mps << " m/s  reps " << reps << "\n";
  out << std::left << std::setw(8) << "sensor" << std::right << std::setw(12) << "collected" << std::setw(12)
      << "generated" << std::setw(12) << "duplicates" << "\n";
  for (const auto& s : m.per_sensor) {
    out << std::left << std::setw(8) << s.sensor_id << std::right << std::setw(12) << s.delivered << std::setw(12)
        << s.generated << std::setw(12) << s.duplicates << "\n";
  }
  out << std::left << std::setw(8) << "total" << std::right << std::setw(12) << m.total() << "\n";
}

int cmd_run(const RunOptions& o, std::ostream& out) {
  const auto cfg = configure(o);
  const auto a = collect(cfg);
  const fs::path dir(o.out);
  ensure_dir(dir);
  write_text(dir / kMetricsFile, a.metrics_json);
  write_text(dir / kTraceFile, a.trace_jsonl);
  experiments::emit_chart_data(std::span(&a.aggregate, 1), dir / kChartFile);
  print_summary(out, a.aggregate, cfg.replications);
  return kOk;
}

int cmd_sweep(const RunOptions& o, std::ostream& out) {
  const auto cfg = configure(o);
  if (cfg.protocol != experiments::LinkProtocol::kAdhocThroughput) {
    throw ConfigInvalid("link_protocol", "sweep needs an adhoc_throughput scenario");
  }
  const auto result = experiments::run_link_sweep(cfg);
  const fs::path dir(o.out);
  ensure_dir(dir);
  const json doc = {{"scenario", experiments::to_json(cfg)},
                    {"scenario_hash", cfg.hash()},
                    {"sweep", experiments::to_json(result)}};
  write_text(dir / kMetricsFile, doc.dump(2) + "\n");
  experiments::emit_chart_data(result, dir / kChartFile);

  const bool udp = result.mode == experiments::SweepMode::kUdp;
  out << (udp ? "udp" : "tcp") << " sweep, " << result.reps << " reps\n";
  out << std::left << std::setw(12) << "distance_m" << std::right << std::setw(16) << "mean_Mbit/s";
  if (udp) out << std::setw(10) << "loss" << std::setw(8) << "stable";
  out << "\n";
  for (const auto& s : result.stops) {
    out << std::left << std::setw(12) << s.distance_m << std::right << std::setw(16) << std::fixed
        << std::setprecision(3) << s.mean_rate_bps / 1e6;
    if (udp) {
      out << std::setw(10) << std::setprecision(4) << s.loss_fraction.value_or(0.0) << std::setw(8)
          << (s.stable.value_or(false) ? "yes" : "no");
    }
    out << std::defaultfloat << "\n";
  }
  out << "fit: a=" << result.fit.a << " b=" << result.fit.b << " c=" << result.fit.c << "\n";
  return kOk;
}

experiments::CollectionMetrics load_run_metrics(const fs::path& dir) {
  const auto path = dir / kMetricsFile;
  if (!fs::exists(path)) throw IoFailure("no " + std::string(kMetricsFile) + " in " + dir.string());
  const auto doc = json_util::parse_file(path.string());
  if (!doc.contains("aggregate")) throw IoFailure(path.string() + " holds no collection metrics");
  return experiments::metrics_from_json(doc.at("aggregate"));
}

struct ReportOptions {
  std::string run_dir = "out";
  std::string ref_series;
  std::string ref_file;
};

int cmd_report(const ReportOptions& o, std::ostream& out) {
  const fs::path dir(o.run_dir);
  const auto measured = load_run_metrics(dir);

  experiments::ReferenceDataset ref;
  experiments::SeriesKey key;
  if (o.ref_series.starts_with("run:")) {
    // Compare against another run's aggregate, e.g. the same directory.
    const auto other = load_run_metrics(o.ref_series.substr(4));
    key = {other.protocol, "run", static_cast<int>(std::lround(other.altitude_m))};
    experiments::ReferenceSeries s{key, {}};
    for (std::size_t i = 0; i < experiments::kReferenceSensors; ++i) {
      s.counts[i] = static_cast<int>(other.count(experiments::reference_sensor_id(i)));
    }
    ref.series.push_back(s);
  } else {
    key = experiments::SeriesKey::parse(o.ref_series);
    ref = o.ref_file.empty() ? experiments::embedded_reference()
                             : experiments::reference_from_json(json_util::parse_file(o.ref_file));
  }
  const auto report = experiments::compare(measured, ref, key);
  out << experiments::format_table(report);
  experiments::write_csv(report, dir / "comparison.csv");
  return kOk;
}

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string runs_dir = "runs";
  std::string sim;
  std::optional<std::uint64_t> seed;
  double speedup = 1.0;
  std::vector<double> origin;
};

int cmd_serve(const ServeOptions& o, std::ostream& out, std::ostream& err) {
  gs::GroundStationOptions gopt;
  gopt.runs_dir = o.runs_dir;
  if (!o.origin.empty()) {
    if (o.origin.size() != 2) throw ConfigInvalid("--origin", "expects lat,lon");
    gopt.origin = gs::GeoOrigin{o.origin[0], o.origin[1]};
  }
  std::optional<experiments::ScenarioConfig> scenario;
  if (!o.sim.empty()) scenario = experiments::load_scenario(o.sim);

  gs::GroundStation station(gopt);
  gs::HttpServer server(station, {o.host, o.port, 32});
  if (!server.bind()) {
    err << "error: cannot bind " << o.host << ":" << o.port << "\n";
    return kBindFailure;
  }

  std::unique_ptr<gs::SimBridge> bridge;
  if (scenario) {
    const auto run_id = station.create_run({{"scenario_hash", scenario->hash()}, {"scenario", scenario->name}});
    bridge = std::make_unique<gs::SimBridge>(station, *scenario, o.seed.value_or(scenario->master_seed));
    bridge->attach();
    out << "run " << run_id << " with " << scenario->drones.size() << " simulated vehicles\n";
  }

  g_stop = false;
  std::signal(SIGTERM, on_stop_signal);
  std::signal(SIGINT, on_stop_signal);

  server.start();
  if (bridge) bridge->start(o.speedup);
  out << "listening on " << o.host << ":" << server.port() << std::endl;

  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));

  if (bridge) {
    bridge->stop();
    bridge->detach();
  }
  station.shutdown("server stopping");
  server.stop();
  out << "stopped" << std::endl;
  return kOk;
}

struct ReplayOptions {
  std::string out;
  std::string runs_dir = "runs";
  std::string run_id;
  std::vector<std::string> logs;
  std::string fixes;
};

int replay_cli_run(const fs::path& dir, std::ostream& out) {
  const auto path = dir / kMetricsFile;
  const auto doc = json_util::parse_file(path.string());
  if (!doc.contains("scenario") || !doc.contains("aggregate")) {
    throw IoFailure(path.string() + " is not a collection run");
  }
  const auto cfg = experiments::scenario_from_json(doc.at("scenario"));
  const auto again = collect(cfg);
  const bool metrics_same = again.metrics_json == read_text(path);
  const bool trace_same = !fs::exists(dir / kTraceFile) || again.trace_jsonl == read_text(dir / kTraceFile);
  out << "metrics " << (metrics_same ? "identical" : "DIFFER") << ", trace "
      << (trace_same ? "identical" : "DIFFERS") << " (hash " << doc.value("trace_hash", "") << ")\n";
  return metrics_same && trace_same ? kOk : kFailure;
}

int replay_store(const ReplayOptions& o, std::ostream& out) {
  const auto store = gs::RunStore::open(o.runs_dir, o.run_id);
  std::map<std::string, std::size_t> kinds;
  std::set<std::string> nodes;
  std::size_t flagged = 0;
  for (const auto& r : store.records()) {
    ++kinds[r.message.value("type", "?")];
    if (auto it = r.message.find("node_id"); it != r.message.end()) nodes.insert(it->get<std::string>());
    if (!r.flags.empty()) ++flagged;
  }
  out << "run " << store.run_id() << ": " << store.records().size() << " records, seq 1.." << store.last_seq()
      << " contiguous\n";
  for (const auto& [k, n] : kinds) out << "  " << k << ": " << n << "\n";
  out << "  nodes: " << nodes.size() << ", flagged records: " << flagged << "\n";
  return kOk;
}

int replay_logs(const ReplayOptions& o, std::ostream& out) {
  if (o.fixes.empty()) throw ConfigInvalid("--fixes", "required when merging --logs");
  const auto fixes = logsync::fixes_from_json(json_util::parse_file(o.fixes));
  std::map<std::string, std::vector<logsync::LogRecord>> logs;
  for (const auto& file : o.logs) {
    std::ifstream in(file);
    if (!in) throw IoFailure("cannot read " + file);
    for (auto& r : logsync::read_log_jsonl(in)) logs[r.node_id].push_back(std::move(r));
  }
  const auto merged = logsync::merge_logs(logs, fixes);
  std::string text;
  for (const auto& e : merged) text += logsync::to_json(e).dump() + "\n";
  const fs::path dir(o.out.empty() ? "." : o.out);
  ensure_dir(dir);
  write_text(dir / "merged.jsonl", text);
  out << "merged " << merged.size() << " records from " << logs.size() << " nodes into "
      << (dir / "merged.jsonl").string() << "\n";
  return kOk;
}

int cmd_replay(const ReplayOptions& o, std::ostream& out) {
  if (!o.logs.empty()) return replay_logs(o, out);
  if (!o.run_id.empty()) return replay_store(o, out);
  if (o.out.empty()) throw ConfigInvalid("--out", "give a run directory, --run with --runs-dir, or --logs");
  return replay_cli_run(o.out, out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fieldsim: UAV data-collection field experiment simulator and ground station"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fieldsim 0.1.0");

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Run a collection scenario and write metrics.json, chart.csv, trace.jsonl");
  RunOptions sweep_opts;
  sweep_opts.out = "sweep-out";
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a two-vehicle link throughput sweep");
  for (auto [cmd, o] : {std::pair{run_cmd, &run_opts}, std::pair{sweep_cmd, &sweep_opts}}) {
    cmd->add_option("--scenario", o->scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o->seed, "Master seed (default: scenario master_seed)");
    cmd->add_option("--reps", o->reps, "Replications (default: scenario value)");
    cmd->add_option("--out", o->out, "Output directory")->capture_default_str();
    cmd->add_option("--altitude", o->altitude, "Override flight altitude of moving drones [m]");
    cmd->add_option("--speed", o->speed, "Override ground speed of moving drones [m/s]");
  }

  ReportOptions report_opts;
  auto* report_cmd = app.add_subcommand("report", "Compare a run against a reference series");
  report_cmd->add_option("--out", report_opts.run_dir, "Run directory produced by `run`")->capture_default_str();
  report_cmd->add_option("--ref-series", report_opts.ref_series,
                         "Reference key, e.g. mesh/field/20, broadcast@35m, or run:<dir>")
      ->required();
  report_cmd->add_option("--ref-file", report_opts.ref_file, "Reference dataset JSON (default: built-in)");

  ServeOptions serve_opts;
  auto* serve_cmd = app.add_subcommand("serve", "Run the ground-station service");
  serve_cmd->add_option("--host", serve_opts.host, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", serve_opts.port, "Listen port (0 picks one)")->capture_default_str();
  serve_cmd->add_option("--runs-dir", serve_opts.runs_dir, "Run storage directory")->capture_default_str();
  serve_cmd->add_option("--sim", serve_opts.sim, "Scenario whose drones are simulated in-process")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--seed", serve_opts.seed, "Seed for the simulated vehicles");
  serve_cmd->add_option("--speedup", serve_opts.speedup, "Simulated seconds per wall-clock second")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  serve_cmd->add_option("--origin", serve_opts.origin, "Display origin as lat,lon")->delimiter(',');

  ReplayOptions replay_opts;
  auto* replay_cmd = app.add_subcommand(
      "replay", "Re-run a run directory and verify it, replay a stored GS run, or merge field logs");
  replay_cmd->add_option("--out", replay_opts.out, "Run directory to verify, or output directory for --logs");
  replay_cmd->add_option("--runs-dir", replay_opts.runs_dir, "Ground-station run storage")->capture_default_str();
  replay_cmd->add_option("--run", replay_opts.run_id, "Stored ground-station run id");
  replay_cmd->add_option("--logs", replay_opts.logs, "Per-node JSONL logs to merge")->check(CLI::ExistingFile);
  replay_cmd->add_option("--fixes", replay_opts.fixes, "GPS time fixes JSON")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream e_out;
    const int code = app.exit(e, o, e_out);
    out << o.str();
    err << e_out.str();
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(run_opts, out);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, out);
    if (*report_cmd) return cmd_report(report_opts, out);
    if (*serve_cmd) return cmd_serve(serve_opts, out, err);
    if (*replay_cmd) return cmd_replay(replay_opts, out);
  } catch (const ConfigInvalid& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const UnknownSeries& e) {
    err << "unknown series: " << e.what() << "\n";
    return kUnknownSeries;
  } catch (const IoFailure& e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const UnknownRun& e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace fieldsim::cli
