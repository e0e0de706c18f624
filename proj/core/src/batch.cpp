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

#include "sharedctl/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace sharedctl {

ScenarioSpec trial_spec(const ScenarioSpec& base, ControlMode mode, int index, std::uint64_t seed_base) {
  const auto& population = driver_population();
  const int sets = static_cast<int>(population.size());
  ScenarioSpec spec = base;
  spec.mode = mode;
  spec.driver_set = index % sets;
  spec.driver = population[spec.driver_set];
  spec.seed = seed_base + static_cast<std::uint64_t>(index / sets);
  return spec;
}

BatchResult run_batch(const ScenarioSpec& base, const BatchOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (options.modes.empty()) throw std::invalid_argument("batch needs at least one mode");

  std::vector<ScenarioSpec> specs;
  for (ControlMode mode : options.modes) {
    for (int i = 0; i < options.trials; ++i) specs.push_back(trial_spec(base, mode, i, options.seed_base));
  }
  std::vector<TrialResult> results(specs.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        Simulation sim(specs[i]);
        sim.run();
        TrialResult& r = results[i];
        r.mode = specs[i].mode;
        r.driver_set = specs[i].driver_set;
        r.seed = specs[i].seed;
        r.events = detect_events(sim.log(), sim.event_context());
        r.spec_digest = digest_hex(to_json(specs[i]));
        r.log_digest = digest_hex(sim.log().csv());
        if (options.keep_logs) r.log = sim.log();
        for (const LogRow& row : sim.log().rows) {
          r.lambda_max = std::max(r.lambda_max, row.lambda);
          r.torque_max = std::max(r.torque_max, std::abs(row.t_mpc));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(specs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  BatchResult out;
  out.trials = std::move(results);
  std::vector<RunEvents> runs;
  for (const TrialResult& t : out.trials) runs.push_back({to_string(t.mode), t.driver_set, t.seed, t.events});
  out.report = aggregate(std::move(runs), to_string(base.preset));
  return out;
}

}  // namespace sharedctl
