// Copyright 2026 The sharedctl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "sharedctl/arbitration.hpp"
#include "sharedctl/metrics.hpp"
#include "sharedctl/nmpc.hpp"
#include "sharedctl/scenario.hpp"

using namespace sharedctl;

namespace {

void BM_Rk4Step(benchmark::State& state) {
  VehicleState s;
  s.vx = 25.0;
  s.theta = 0.1;
  RoadFrame road;
  const PlantInputs in{0.0, 1.0, 0.5, std::nullopt, 0.65};
  for (auto _ : state) {
    auto next = step(s, road, in, VehicleParams{}, SteeringParams{}, 0.001);
    benchmark::DoNotOptimize(next);
  }
}
BENCHMARK(BM_Rk4Step);

void BM_NmpcSolve(benchmark::State& state) {
  const NmpcConfig c = state.range(0) ? NmpcConfig::evasive() : NmpcConfig::corrective();
  const ReferencePath path = ReferencePath::straight(-50.0, 0.0, 0.0, 3000.0);
  VehicleState s;
  s.vx = 25.0;
  s.y = 0.8;
  const RoadFrame road{0.8, 0.0, 0.0};
  const Reference ref = build_reference(path, s, c);
  AuthorityCommand cmd;
  cmd.lambda = state.range(0) ? 12.0 : 3.0;
  NmpcSolver solver(c);
  ControlOutput warm = solver.solve(s, road, ref, cmd);
  for (auto _ : state) {
    warm = solver.solve(s, road, ref, cmd, &warm);
    benchmark::DoNotOptimize(warm.torque);
  }
  state.SetLabel(c.name);
}
BENCHMARK(BM_NmpcSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_FuzzyAuthority(benchmark::State& state) {
  const FuzzySystem sys = FuzzySystem::corrective_default();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ey(-2.0, 6.0), rate(-1.5, 1.5), dtc(0.0, 200.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(corrective_authority({ey(rng), rate(rng), dtc(rng), std::nullopt}, sys));
  }
}
BENCHMARK(BM_FuzzyAuthority);

void BM_SimulationTick(benchmark::State& state) {
  ScenarioSpec spec = scenario_preset(state.range(0) ? Preset::Evasive : Preset::Corrective);
  spec.duration = 1e6;
  Simulation sim(spec);
  for (auto _ : state) sim.tick();
  state.SetLabel(to_string(spec.preset));
}
BENCHMARK(BM_SimulationTick)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_RankSum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> a(n), b(n);
  for (double& v : a) v = g(rng);
  for (double& v : b) v = g(rng) + 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(rank_sum_test(a, b));
}
BENCHMARK(BM_RankSum)->Arg(6)->Arg(8)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
