#include <algorithm>
#include <cmath>

#include <benchmark/benchmark.h>

#include <nlohmann/json.hpp>

#include "cone_spde/approx.hpp"
#include "cone_spde/experiment.hpp"

namespace {

void BM_SupInf(benchmark::State& state) {
  const cone_spde::ScalarField f = [](const cone_spde::StateVec& h) {
    return std::min(std::abs(h[0]), 1.0);
  };
  cone_spde::SearchSpec search;
  search.lipschitz = 1.0;
  search.sup_bound = 1.0;
  search.grid_points = static_cast<std::size_t>(state.range(0));
  double x = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cone_spde::sup_inf_convolve(f, {1e-2, 1e-3}, cone_spde::StateVec{x}, search));
    x = x > 2.0 ? -2.0 : x + 1e-3;
  }
}
BENCHMARK(BM_SupInf)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_Mollify(benchmark::State& state) {
  const auto f = cone_spde::VectorField::from_spec(
      {{"family", "affine"}, {"diag", 2.0}, {"offset", 0.5}}, 4);
  cone_spde::MollifierParams p;
  p.n = static_cast<std::size_t>(state.range(0));
  p.points_per_axis = 17;
  const cone_spde::StateVec h{0.1, 0.2, 0.3, 0.4};
  for (auto _ : state) benchmark::DoNotOptimize(cone_spde::mollify(f, p, h).value);
}
BENCHMARK(BM_Mollify)->DenseRange(1, 3)->Unit(benchmark::kMicrosecond);

void BM_Stratonovich(benchmark::State& state) {
  const auto cfg = cone_spde::parse_config(nlohmann::json{{"preset", "heat-positive"}});
  cone_spde::StateVec h(std::vector<double>(cfg.dim(), 0.5));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cone_spde::stratonovich_correction(cfg.coefficients, h));
  }
}
BENCHMARK(BM_Stratonovich)->Unit(benchmark::kMicrosecond);

void BM_Retraction(benchmark::State& state) {
  cone_spde::StateVec h(std::vector<double>(static_cast<std::size_t>(state.range(0)), 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(cone_spde::retract(h, 2.0));
}
BENCHMARK(BM_Retraction)->Arg(16)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
