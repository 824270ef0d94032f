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

// End-to-end benchmark harness: one encrypted session per configuration
// over an in-process pipe with injected latency.

#ifndef PRIVLOC_SIM_BENCH_H_
#define PRIVLOC_SIM_BENCH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "privloc/crypto/private_key.h"
#include "privloc/sim/world.h"

namespace privloc::sim {

enum class Topology { kSynthetic, kWorld };

struct BenchConfig {
  std::size_t n = 160;
  std::size_t n_pred = 5;
  std::size_t d = 20;
  std::size_t steps = 3;
  int key_bits = 2048;
  double latency_ms = 1.0;  // one-way
  double step_timeout_s = 120.0;
  double sigma_db = 2.0;
  std::uint64_t seed = 1;
  // kWorld uses an 8-room grid world with n cells; n_pred is then the
  // grid's own maximum and is overwritten with it.
  Topology topology = Topology::kSynthetic;
  // Decrypt the server's cost vectors afterwards and compare them with the
  // plaintext decoder.
  bool verify = true;
};

struct BenchRow {
  std::int64_t t = 0;
  double wall_ms = 0.0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  std::uint64_t round_trips = 0;
  std::uint64_t cmp_ops = 0;
  int state = 0;
  bool timed_out = false;

  bool operator==(const BenchRow&) const = default;
};

// Aggregates derived from the rows; recomputed and checked on load.
struct BenchSummary {
  double mean_wall_ms = 0.0;
  // Mean over t >= 1, where the predecessor tournaments run.
  double steady_wall_ms = 0.0;
  double p50_wall_ms = 0.0;
  double p90_wall_ms = 0.0;
  double max_wall_ms = 0.0;
  double mean_bytes = 0.0;
  std::uint64_t max_bytes = 0;
  double mean_round_trips = 0.0;
  std::uint64_t timed_out = 0;
};

struct BenchResult {
  BenchConfig config;
  std::vector<BenchRow> rows;
  BenchSummary summary;
  // Oracle comparison; unset when verification was off.
  std::optional<bool> costs_match;
  std::optional<bool> positions_match;
  // Ground-truth accuracy, world topology only.
  std::optional<Accuracy> accuracy;
};

BenchSummary Summarize(const std::vector<BenchRow>& rows);

// Runs one configuration. A supplied key must match config.key_bits;
// otherwise a fresh key is generated.
BenchResult RunBench(const BenchConfig& config,
                     const crypto::PrivateKey* key = nullptr);

// Cartesian sweep file:
//   {"base": {config fields}, "sweep": {"n": [...], "n_pred": [...], "d": [...]}}
std::vector<BenchConfig> SweepFromJson(const std::string& json);

std::string ReportToJson(const std::vector<BenchResult>& results);
// Throws SimulationError when a stored aggregate does not match the one
// recomputed from the rows.
std::vector<BenchResult> ReportFromJson(const std::string& json);
// One line per row, prefixed with the configuration.
std::string ReportToCsv(const std::vector<BenchResult>& results);

}  // namespace privloc::sim

#endif  // PRIVLOC_SIM_BENCH_H_
