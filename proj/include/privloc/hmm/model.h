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

#ifndef PRIVLOC_HMM_MODEL_H_
#define PRIVLOC_HMM_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "privloc/params.h"

namespace privloc::hmm {

// Negative-log cost at scale kCostScale.
using Cost = std::int64_t;

// RSSI bounds in dBm accepted from clients and produced by the simulator.
inline constexpr double kMinRssiDbm = -110.0;
inline constexpr double kMaxRssiDbm = 0.0;

// Floor applied to probabilities before the neg-log transform.
inline constexpr double kProbabilityFloor = 1e-9;
// Tolerance on the recovered outgoing probabilities of each state.
inline constexpr double kNormalizationTolerance = 1e-9;

struct StateMeta {
  int id = 0;
  double x = 0.0;  // meters
  double y = 0.0;
  int room = 0;

  bool operator==(const StateMeta&) const = default;
};

// The server's secret. Transitions are stored by target: pred[i] lists the
// states j with a non-zero probability of moving j -> i, and
// transition_cost[i][k] is the cost of pred[i][k] -> i.
struct HmmModel {
  std::vector<StateMeta> states;
  std::size_t num_aps = 0;
  std::vector<std::vector<int>> pred;
  std::vector<std::vector<Cost>> transition_cost;
  // mean_rssi[i][d] at scale f.
  std::vector<std::vector<std::int64_t>> mean_rssi;
  std::vector<Cost> initial_cost;
  std::int64_t scale_f = kMeasurementScale;

  std::size_t size() const { return states.size(); }
  std::size_t max_predecessors() const;

  bool operator==(const HmmModel&) const = default;
};

// Throws ModelError naming the first violated invariant.
void ValidateModel(const HmmModel& model);

// One RSSI vector in fixed point: rssi at scale f, rssi_sq = rssi^2 at f^2.
struct Observation {
  std::int64_t t = 0;
  std::vector<std::int64_t> rssi;
  std::vector<std::int64_t> rssi_sq;

  bool operator==(const Observation&) const = default;
};

// Encodes dBm readings. Throws ModelError for readings outside
// [kMinRssiDbm, kMaxRssiDbm].
Observation MakeObservation(std::int64_t t, std::span<const double> dbm,
                            std::int64_t scale_f = kMeasurementScale);

// round(-ln(p) * scale). Throws ModelError unless 0 < p <= 1.
Cost NegLogCost(double p, std::int64_t scale = kCostScale);

// exp(-cost / scale)
double CostToProbability(Cost cost, std::int64_t scale = kCostScale);

// Sum_d (r_d - mu_id)^2, exact, at scale f^2. Throws ModelError on a
// dimension mismatch or when the sum reaches 2^L_COST.
Cost EmissionCost(const HmmModel& model, std::size_t state,
                  const Observation& obs);

// The same quantity through r^2 - 2 mu r + mu^2, the form evaluated under
// encryption.
Cost EmissionCostExpanded(const HmmModel& model, std::size_t state,
                          const Observation& obs);

// Largest possible single-step cost increment for any observation inside
// the RSSI bounds: max transition cost plus the worst-case emission.
Cost MaxStepIncrement(const HmmModel& model);

}  // namespace privloc::hmm

#endif  // PRIVLOC_HMM_MODEL_H_
