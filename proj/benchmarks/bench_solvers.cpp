#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "ringswarm/cbc.hpp"
#include "ringswarm/orca.hpp"
#include "ringswarm/sim.hpp"

using namespace ringswarm;

namespace {

Vec2 random_unit(std::mt19937_64 &eng) {
  const double a = std::uniform_real_distribution<double>(0.0, 6.283185307179586)(eng);
  return {std::cos(a), std::sin(a)};
}

void BM_SolveQp(benchmark::State &state) {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<QPProblem> problems(64);
  for (auto &qp : problems) {
    qp.box = 0.6;
    qp.target = {u(eng), u(eng)};
    for (int k = 0; k < state.range(0); ++k) qp.constraints.push_back({random_unit(eng), 0.2 + 0.3 * u(eng), false});
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(problems[i++ % problems.size()]));
}
BENCHMARK(BM_SolveQp)->Arg(1)->Arg(4)->Arg(8)->Arg(16);

void BM_SolveVelocityLp(benchmark::State &state) {
  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> u(-0.12, 0.12);
  std::vector<std::vector<HalfPlane>> sets(64);
  for (auto &planes : sets)
    for (int k = 0; k < state.range(0); ++k) planes.push_back({{u(eng), u(eng)}, random_unit(eng)});
  std::size_t i = 0;
  for (auto _ : state) {
    const auto &planes = sets[i++ % sets.size()];
    benchmark::DoNotOptimize(solve_velocity_lp({{0.05, 0.05}, planes, 0.12}));
  }
}
BENCHMARK(BM_SolveVelocityLp)->Arg(1)->Arg(4)->Arg(8)->Arg(16);

// Simulated seconds per run, N = 20, per strategy.
void BM_Simulate(benchmark::State &state) {
  SimConfig c;
  c.strategy = static_cast<Strategy>(state.range(0));
  c.params.c_r = c.strategy == Strategy::cbc || c.strategy == Strategy::orca ? 1.0 : 0.5;
  c.t_total = 100.0;
  c.t_measure = 50.0;
  for (auto _ : state) benchmark::DoNotOptimize(run(c).lambda);
  state.SetLabel(std::string(to_string(c.strategy)));
}
BENCHMARK(BM_Simulate)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
