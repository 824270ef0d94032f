/*
 * Copyright 2026 The privloc Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// privloc-server: serves encrypted localization sessions for one model.

#include <pthread.h>
#include <signal.h>

#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "privloc/hmm/model_io.h"
#include "privloc/server/session.h"
#include "privloc/wire/channel.h"

int main(int argc, char** argv) {
  using namespace privloc;
  CLI::App app{"Privacy-preserving localization server"};
  std::string model_path, stats_path, log_level = "info", bind = "0.0.0.0";
  int port = wire::kDefaultPort;
  std::int64_t t_max = server::kDefaultHorizon;
  app.add_option("--model", model_path, "Model JSON file")->required();
  app.add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  app.add_option("--bind", bind, "Bind address");
  app.add_option("--t-max", t_max, "Steps before a session restarts from the initial costs")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");
  app.add_option("--stats-out", stats_path, "Append per-step stats as JSON lines");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  std::shared_ptr<const server::ModelHost> host;
  try {
    host = std::make_shared<const server::ModelHost>(hmm::LoadModelFile(model_path));
  } catch (const std::exception& e) {
    spdlog::error("cannot load model {}: {}", model_path, e.what());
    return 2;
  }

  std::ofstream stats;
  if (!stats_path.empty()) {
    stats.open(stats_path, std::ios::app);
    if (!stats) {
      spdlog::error("cannot open {}", stats_path);
      return 1;
    }
  }
  server::StepSink sink;
  if (stats.is_open()) {
    // The server serializes sink calls.
    sink = [&stats](const server::StepRecord& r) { stats << r.ToJson() << std::endl; };
  }
  server::LocalizationServer srv(host, server::EngineOptions{t_max}, sink);

  // Block termination signals here so every worker inherits the mask; one
  // thread waits for them and stops the listener.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<wire::TcpListener> listener;
  try {
    listener = std::make_unique<wire::TcpListener>(static_cast<std::uint16_t>(port), bind);
  } catch (const std::exception& e) {
    spdlog::error("cannot listen on {}:{}: {}", bind, port, e.what());
    return 1;
  }
  const hmm::HmmModel& m = host->model();
  spdlog::info("ready on {}:{} N={} D={} N'max={} t_max={}", bind, listener->port(), m.size(),
               m.num_aps, m.max_predecessors(), t_max);

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {}, shutting down", sig);
    srv.Stop();
  });
  waiter.detach();
  srv.Serve(*listener);
  const server::ServerCounters& c = srv.counters();
  spdlog::info("stopped: {} sessions, {} failed, {} steps", c.sessions_started.load(),
               c.sessions_failed.load(), c.steps_completed.load());
  return 0;
}
