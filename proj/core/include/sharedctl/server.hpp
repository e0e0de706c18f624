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

#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "sharedctl/scenario.hpp"
#include "sharedctl/session.hpp"

namespace sharedctl {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;          ///< 0 picks a free port
  double tick_period = 0.05;           ///< wall-clock seconds per control tick
  bool start_paused = false;
  std::size_t telemetry_queue = 64;    ///< per client; oldest frames dropped beyond this
  double linger = 0.5;                 ///< s to flush clients after the scenario ends
};

/// Websocket endpoint /sim and HTTP GET /scenario around one SimSession. Network I/O runs on
/// its own thread; the simulation loop never waits on clients.
class SimServer {
 public:
  /// Binds immediately; throws std::runtime_error when the address is unavailable.
  SimServer(ScenarioSpec spec, ServerOptions options);
  ~SimServer();
  SimServer(const SimServer&) = delete;
  SimServer& operator=(const SimServer&) = delete;

  unsigned short port() const;
  /// Runs the wall-clock loop until the scenario ends or stop() is called.
  void run();
  /// Thread-safe.
  void stop();

  /// Valid after run() returns.
  const SimSession& session() const;
  /// Mean absolute lateness of tick starts against their schedule, s.
  double mean_lateness() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sharedctl
