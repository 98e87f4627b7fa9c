#include <benchmark/benchmark.h>

#include <filesystem>

#include "fieldsim/experiments/collection.hpp"
#include "fieldsim/experiments/scenario.hpp"
#include "fieldsim/link/throughput.hpp"
#include "fieldsim/sim/simulator.hpp"
#include "fieldsim/world/contact.hpp"

namespace {

using namespace fieldsim;

const std::filesystem::path kScenarios = std::filesystem::path(FIELDSIM_DATA_DIR) / "scenarios";

void BM_EventQueue(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) {
    sim::Simulator s(1);
    s.set_handler([](sim::Event&, sim::Simulator&) {});
    for (std::int64_t i = 0; i < n; ++i) {
      s.schedule(sim::SimTime{(i * 7919) % n}, "node", sim::EventKind::kBeacon);
    }
    benchmark::DoNotOptimize(s.run_until(sim::SimTime{n}));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EventQueue)->Arg(1 << 10)->Arg(1 << 14);

void BM_ContactWindows(benchmark::State& state) {
  world::Mission m;
  m.speed = 5.0;
  for (int lane = 0; lane < 6; ++lane) {
    const double y = 10.0 + 60.0 * lane;
    m.waypoints.push_back({lane % 2 ? 316.0 : 0.0, y, 20.0});
    m.waypoints.push_back({lane % 2 ? 0.0 : 316.0, y, 20.0});
  }
  const world::Position target{150.0, 150.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(world::contact_windows(m, target, 44.0));
}
BENCHMARK(BM_ContactWindows);

void BM_FitQuadratic(benchmark::State& state) {
  std::vector<link::Sample> pts;
  for (double d = 20.0; d <= 200.0; d += 20.0) pts.emplace_back(d, 30e6 - 280e3 * d + 700 * d * d);
  for (auto _ : state) benchmark::DoNotOptimize(link::fit_quadratic(pts));
}
BENCHMARK(BM_FitQuadratic);

void BM_RunCollection(benchmark::State& state) {
  const auto cfg = experiments::load_scenario(kScenarios / (state.range(0) ? "canonical_broadcast.json"
                                                                             : "canonical_mesh.json"));
  for (auto _ : state) benchmark::DoNotOptimize(experiments::run_collection(cfg, 0));
  state.SetLabel(state.range(0) ? "broadcast" : "mesh");
}
BENCHMARK(BM_RunCollection)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
