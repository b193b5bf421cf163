#include <benchmark/benchmark.h>

#include <nlohmann/json.hpp>

#include "cone_spde/experiment.hpp"
#include "cone_spde/simulate.hpp"

namespace {

cone_spde::ExperimentConfig config(const char* preset) {
  auto cfg = cone_spde::parse_config(nlohmann::json{{"preset", preset}});
  cfg.sim.threads = 1;
  return cfg;
}

void BM_SimulatePath(benchmark::State& state) {
  auto cfg = config("heat-positive");
  cfg.sim.dt = 1.0 / static_cast<double>(state.range(0));
  std::size_t index = 0;
  for (auto _ : state) {
    auto r = cone_spde::simulate_path(cfg.semigroup, cfg.coefficients, cfg.cone, cfg.noise,
                                      cfg.sim, cfg.initial, index++);
    benchmark::DoNotOptimize(r.min_margin);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePath)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Ensemble(benchmark::State& state) {
  auto cfg = config("heat-positive");
  cfg.sim.paths = 64;
  cfg.sim.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto e = cone_spde::run_ensemble(cfg.semigroup, cfg.coefficients, cfg.cone, cfg.noise, cfg.sim,
                                     cfg.initial);
    benchmark::DoNotOptimize(e.exit_fraction());
  }
}
BENCHMARK(BM_Ensemble)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Checker(benchmark::State& state) {
  const auto cfg = config("heat-positive-badvol");
  for (auto _ : state) {
    auto r = cone_spde::run_checker(cfg);
    benchmark::DoNotOptimize(r.sampled_points);
  }
}
BENCHMARK(BM_Checker)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
