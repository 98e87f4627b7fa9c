#include "fieldsim/experiments/sweep.hpp"

#include <cmath>
#include <numeric>

#include "fieldsim/errors.hpp"
#include "fieldsim/sim/rng.hpp"

namespace fieldsim::experiments {

SweepResult run_link_sweep(const ScenarioConfig& cfg) {
  if (cfg.drones.size() != 2) {
    throw ConfigInvalid("drones", "a link sweep needs exactly 2 drones, got " + std::to_string(cfg.drones.size()));
  }
  const int stationary = static_cast<int>(cfg.drones[0].mission.stationary()) +
                         static_cast<int>(cfg.drones[1].mission.stationary());
  if (stationary != 1) throw ConfigInvalid("drones", "exactly one drone must be stationary");
  const auto& anchor = cfg.drones[0].mission.stationary() ? cfg.drones[0] : cfg.drones[1];
  const auto& mover = cfg.drones[0].mission.stationary() ? cfg.drones[1] : cfg.drones[0];

  const auto& sp = cfg.sweep;
  const auto& model = cfg.link_params.throughput;
  const double reach = radio::effective_range(anchor.radio, mover.radio, cfg.propagation);

  SweepResult result;
  result.mode = sp.mode;
  result.reps = sp.reps;
  std::vector<sim::RngStream> streams;
  for (int r = 0; r < sp.reps; ++r) {
    streams.emplace_back(sim::replication_seed(cfg.master_seed, static_cast<std::uint64_t>(r)),
                         sim::stream_id_for(mover.id));
  }

  // Integer stop index avoids accumulating step error.
  const auto n_stops = static_cast<int>(std::floor((sp.stop_m - sp.start_m) / sp.step_m + 1e-9)) + 1;
  for (int i = 0; i < n_stops; ++i) {
    SweepStop stop;
    stop.distance_m = sp.start_m + sp.step_m * i;
    const double capacity = stop.distance_m <= reach ? link::tcp_rate(stop.distance_m, model) : 0.0;
    double loss_sum = 0.0;
    for (auto& rng : streams) {
      const double noisy = capacity * (1.0 + sp.jitter * (2.0 * rng.next_uniform() - 1.0));
      if (sp.mode == SweepMode::kTcp) {
        stop.rep_rates_bps.push_back(noisy);
      } else {
        const auto udp = link::udp_delivered(model.udp_offered_bps, noisy, model.loss_stability_threshold);
        stop.rep_rates_bps.push_back(udp.delivered_bps);
        loss_sum += udp.loss_fraction;
      }
    }
    stop.mean_rate_bps = std::accumulate(stop.rep_rates_bps.begin(), stop.rep_rates_bps.end(), 0.0) /
                         static_cast<double>(stop.rep_rates_bps.size());
    if (sp.mode == SweepMode::kUdp) {
      stop.loss_fraction = loss_sum / static_cast<double>(sp.reps);
      stop.stable = *stop.loss_fraction <= model.loss_stability_threshold;
    }
    result.stops.push_back(std::move(stop));
  }

  std::vector<link::Sample> points;
  for (const auto& s : result.stops) points.emplace_back(s.distance_m, s.mean_rate_bps);
  if (points.size() >= 3) result.fit = link::fit_quadratic(points);
  return result;
}

nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json stops = nlohmann::json::array();
  for (const auto& s : r.stops) {
    nlohmann::json j{{"distance_m", s.distance_m}, {"mean_rate_bps", s.mean_rate_bps}, {"rep_rates_bps", s.rep_rates_bps}};
    if (s.loss_fraction) j["loss_fraction"] = *s.loss_fraction;
    if (s.stable) j["stable"] = *s.stable;
    stops.push_back(std::move(j));
  }
  return {{"mode", r.mode == SweepMode::kTcp ? "tcp" : "udp"},
          {"reps", r.reps},
          {"fit", {{"a", r.fit.a}, {"b", r.fit.b}, {"c", r.fit.c}}},
          {"stops", stops}};
}

}  // namespace fieldsim::experiments
