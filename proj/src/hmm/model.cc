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

#include "privloc/hmm/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "privloc/crypto/fixed_point.h"
#include "privloc/error.h"

namespace privloc::hmm {
namespace {

constexpr __int128 kCostLimit = static_cast<__int128>(1) << kCostBits;

Cost CheckedCost(__int128 v) {
  if (v < 0 || v >= kCostLimit) {
    throw ModelError("cost outside [0, 2^L_COST)");
  }
  return static_cast<Cost>(v);
}

void CheckDims(const HmmModel& model, std::size_t state,
               const Observation& obs) {
  if (state >= model.size()) throw ModelError("state index out of range");
  if (obs.rssi.size() != model.num_aps || obs.rssi_sq.size() != model.num_aps) {
    throw ModelError("observation has " + std::to_string(obs.rssi.size()) +
                     " entries, model expects " +
                     std::to_string(model.num_aps));
  }
}

}  // namespace

std::size_t HmmModel::max_predecessors() const {
  std::size_t m = 0;
  for (const auto& p : pred) m = std::max(m, p.size());
  return m;
}

void ValidateModel(const HmmModel& model) {
  const std::size_t n = model.size();
  if (n == 0) throw ModelError("model has no states");
  if (model.num_aps == 0) throw ModelError("model has no access points");
  if (model.scale_f != kMeasurementScale) {
    throw ModelError("unsupported scale_f " + std::to_string(model.scale_f));
  }
  if (model.pred.size() != n || model.transition_cost.size() != n ||
      model.mean_rssi.size() != n || model.initial_cost.size() != n) {
    throw ModelError("per-state arrays must all have N entries");
  }
  const std::int64_t min_mu = static_cast<std::int64_t>(kMinRssiDbm) *
                              model.scale_f;
  std::vector<double> outgoing(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (model.states[i].id != static_cast<int>(i)) {
      throw ModelError("state ids must equal their index");
    }
    const auto& pred = model.pred[i];
    if (pred.empty()) {
      throw ModelError("state " + std::to_string(i) +
                       " has an empty predecessor list");
    }
    if (model.transition_cost[i].size() != pred.size()) {
      throw ModelError("A_cost row " + std::to_string(i) +
                       " does not match its predecessor list");
    }
    std::vector<int> sorted = pred;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ModelError("duplicate predecessor for state " + std::to_string(i));
    }
    for (std::size_t k = 0; k < pred.size(); ++k) {
      const int j = pred[k];
      if (j < 0 || static_cast<std::size_t>(j) >= n) {
        throw ModelError("predecessor id out of range");
      }
      const Cost c = model.transition_cost[i][k];
      if (c < 0) throw ModelError("negative transition cost");
      outgoing[static_cast<std::size_t>(j)] += CostToProbability(c);
    }
    if (model.mean_rssi[i].size() != model.num_aps) {
      throw ModelError("mu row " + std::to_string(i) + " must have D entries");
    }
    for (std::int64_t mu : model.mean_rssi[i]) {
      if (mu < min_mu || mu > 0) {
        throw ModelError("mean RSSI outside [-110 dBm, 0 dBm]");
      }
    }
    if (model.initial_cost[i] < 0) throw ModelError("negative initial cost");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::fabs(outgoing[j] - 1.0) > kNormalizationTolerance) {
      throw ModelError("outgoing transition probabilities of state " +
                       std::to_string(j) + " sum to " +
                       std::to_string(outgoing[j]) + ", expected 1");
    }
  }
}

Observation MakeObservation(std::int64_t t, std::span<const double> dbm,
                            std::int64_t scale_f) {
  Observation obs;
  obs.t = t;
  obs.rssi.reserve(dbm.size());
  obs.rssi_sq.reserve(dbm.size());
  for (double v : dbm) {
    if (!(v >= kMinRssiDbm && v <= kMaxRssiDbm)) {
      throw ModelError("RSSI reading " + std::to_string(v) +
                       " dBm outside [-110, 0]");
    }
    const std::int64_t r = crypto::FpEncode(v, scale_f);
    obs.rssi.push_back(r);
    obs.rssi_sq.push_back(r * r);
  }
  return obs;
}

Cost NegLogCost(double p, std::int64_t scale) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ModelError("probability must lie in (0, 1]");
  }
  const long double v = -std::log(static_cast<long double>(p)) *
                        static_cast<long double>(scale);
  return static_cast<Cost>(std::llroundl(v));
}

double CostToProbability(Cost cost, std::int64_t scale) {
  return static_cast<double>(std::exp(-static_cast<long double>(cost) /
                                      static_cast<long double>(scale)));
}

Cost EmissionCost(const HmmModel& model, std::size_t state,
                  const Observation& obs) {
  CheckDims(model, state, obs);
  __int128 sum = 0;
  for (std::size_t d = 0; d < model.num_aps; ++d) {
    const __int128 diff = static_cast<__int128>(obs.rssi[d]) -
                          model.mean_rssi[state][d];
    sum += diff * diff;
    if (sum >= kCostLimit) throw ModelError("emission cost exceeds 2^L_COST");
  }
  return CheckedCost(sum);
}

Cost EmissionCostExpanded(const HmmModel& model, std::size_t state,
                          const Observation& obs) {
  CheckDims(model, state, obs);
  __int128 sum = 0;
  for (std::size_t d = 0; d < model.num_aps; ++d) {
    const __int128 mu = model.mean_rssi[state][d];
    sum += static_cast<__int128>(obs.rssi_sq[d]) - 2 * mu * obs.rssi[d] +
           mu * mu;
  }
  return CheckedCost(sum);
}

Cost MaxStepIncrement(const HmmModel& model) {
  __int128 max_transition = 0;
  for (const auto& row : model.transition_cost) {
    for (Cost c : row) max_transition = std::max<__int128>(max_transition, c);
  }
  for (Cost c : model.initial_cost) {
    max_transition = std::max<__int128>(max_transition, c);
  }
  // |r - mu| <= 110 dBm for any admissible reading and mean.
  const __int128 span = static_cast<__int128>(kMaxRssiDbm - kMinRssiDbm) *
                        model.scale_f;
  const __int128 worst = max_transition +
                         span * span * static_cast<__int128>(model.num_aps);
  return CheckedCost(worst);
}

}  // namespace privloc::hmm
