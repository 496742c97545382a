#include <radiotomo/geometry.hpp>
#include <radiotomo/selection.hpp>
#include <radiotomo/synthesis.hpp>
#include <radiotomo/vb.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace radiotomo;

namespace {

struct Problem {
  Grid grid;
  SensorSet sensors;
  MeasurementSet data;
  HyperPriors priors;
};

// Fixed physical area (20 x 20) sampled with n points per side.
Problem make_problem(std::size_t n, std::size_t t) {
  const double spacing = 20.0 / static_cast<double>(n);
  const Grid grid(n, n, spacing, {0.5 + 0.5 * spacing, 0.5 + 0.5 * spacing});
  SensorSet sensors = perimeter_sensors(grid.area(), 80, 1);
  const HyperParams truth{20.0, {0.0, 5.5}, {10.0, 2.0}};
  const auto z = sample_potts(grid, {1.5, 2}, 50, 2);
  const auto f = sample_slf(z, truth, 3);
  std::mt19937_64 rng(4);
  auto data = synthesize_measurements(f, random_links(t, sensors.size(), rng), grid, sensors, 0.39,
                                      truth, 5);
  HyperPriors priors;
  priors.a_nu = 1300.0 * static_cast<double>(grid.size()) / 3600.0;
  priors.m = {0.0, 5.3};
  priors.sigma2 = {1e-4, 1e-4};
  priors.a = {0.8, 0.8};
  priors.b = {1.0, 0.5};
  return {grid, std::move(sensors), std::move(data), priors};
}

void BM_VbIteration(benchmark::State& st) {
  const auto p = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  const VbModel model(p.grid, p.data, p.priors, {1.5, 2});
  auto state = model.init_state(7);
  for (auto _ : st) {
    model.iterate(state);
    benchmark::DoNotOptimize(state.noise_scale);
  }
  st.counters["sites"] = static_cast<double>(p.grid.size());
}
BENCHMARK(BM_VbIteration)->Args({20, 800})->Args({40, 800})->Args({60, 800})->Args({20, 1600});

void BM_PoolScoring(benchmark::State& st) {
  const auto p = make_problem(20, 800);
  const VbModel model(p.grid, p.data, p.priors, {1.5, 2});
  auto state = model.init_state(7);
  for (int i = 0; i < 50; ++i) model.iterate(state);
  SyntheticSource source(p.grid, p.sensors, 0.39, std::vector<double>(p.grid.size(), 0.0), 20.0,
                         static_cast<std::size_t>(st.range(0)), 9);
  const auto pool = source.pool(0);
  for (auto _ : st) benchmark::DoNotOptimize(select_batch(pool, state, pool.size() / 2));
}
BENCHMARK(BM_PoolScoring)->Arg(100)->Arg(200)->Arg(1000);

void BM_WeightVector(benchmark::State& st) {
  const auto p = make_problem(static_cast<std::size_t>(st.range(0)), 1);
  const Link link{0, 41};
  for (auto _ : st) benchmark::DoNotOptimize(weight_vector(link, p.grid, p.sensors, 0.39));
}
BENCHMARK(BM_WeightVector)->Arg(20)->Arg(60);

}  // namespace
BENCHMARK_MAIN();
