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

#include "privloc/server/engine.h"

#include <string>

#include "privloc/error.h"

namespace privloc::server {

ViterbiEngine::ViterbiEngine(const hmm::HmmModel& model,
                             const crypto::PublicKey& pk,
                             crypto::RandomSource& rng, EngineOptions options,
                             stpc::BlindingAudit* audit)
    : model_(model),
      pk_(pk),
      rng_(rng),
      options_(options),
      comparisons_(pk, rng, audit),
      max_increment_(hmm::MaxStepIncrement(model)) {
  if (options_.horizon <= 0) throw Error("horizon must be positive");
}

std::vector<Ciphertext> ViterbiEngine::ComputeEmissionCosts(
    const EncryptedObservation& obs) const {
  const std::size_t d = model_.num_aps;
  if (obs.values.size() != d || obs.squares.size() != d) {
    throw ProtocolError(wire::kErrCountMismatch,
                        "observation carries " +
                            std::to_string(obs.values.size()) + "/" +
                            std::to_string(obs.squares.size()) +
                            " ciphertexts, model has D=" + std::to_string(d));
  }
  // sum_d [r_d^2] is shared by every state.
  Ciphertext squares = obs.squares.front();
  for (std::size_t k = 1; k < d; ++k) squares = pk_.Add(squares, obs.squares[k]);

  // The bases are the same for every state; build their tables once.
  // mu <= 0, so every exponent -2 mu is non-negative.
  const crypto::MultiExpTable table(pk_, obs.values, /*allow_negative=*/false);
  std::vector<Ciphertext> out;
  out.reserve(model_.size());
  std::vector<crypto::BigInt> coeffs(d);
  for (std::size_t i = 0; i < model_.size(); ++i) {
    crypto::BigInt mu_sq = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const crypto::BigInt mu = crypto::FromInt64(model_.mean_rssi[i][k]);
      coeffs[k] = -2 * mu;
      mu_sq += mu * mu;
    }
    const Ciphertext cross = table.Combine(coeffs);
    out.push_back(pk_.AddPlain(pk_.Add(squares, cross), mu_sq));
  }
  return out;
}

Ciphertext ViterbiEngine::Step(const EncryptedObservation& obs,
                               stpc::RoundExecutor& executor) {
  if (static_cast<std::int64_t>(obs.t) != next_t()) {
    throw ProtocolError(wire::kErrOutOfOrder,
                        "expected observation t=" + std::to_string(next_t()) +
                            ", got t=" + std::to_string(obs.t));
  }
  const stpc::StpcCounters before = comparisons_.counters();

  const bool restart = costs_.t < 0 || steps_since_restart_ >= options_.horizon;
  const std::int64_t local_step = restart ? 0 : steps_since_restart_;
  // theta after k+1 steps is at most (k+1) * max_increment.
  const __int128 projected =
      static_cast<__int128>(local_step + 1) * max_increment_;
  if (projected >= (static_cast<__int128>(1) << kCostBits)) {
    throw ProtocolError(wire::kErrCostOverflow,
                        "accumulated costs could exceed 2^L_COST at step " +
                            std::to_string(obs.t) +
                            "; reset the session or lower the horizon");
  }

  const std::vector<Ciphertext> emissions = ComputeEmissionCosts(obs);
  const std::size_t n = model_.size();
  std::vector<Ciphertext> theta(n);

  if (restart) {
    for (std::size_t i = 0; i < n; ++i) {
      theta[i] = pk_.Rerandomize(
          pk_.AddPlain(emissions[i], crypto::FromInt64(model_.initial_cost[i])),
          rng_);
    }
    steps_since_restart_ = 0;
  } else {
    std::vector<Ciphertext> prev(n);
    for (std::size_t j = 0; j < n; ++j) {
      prev[j] = pk_.Rerandomize(costs_.theta[j], rng_);
    }
    std::vector<std::vector<stpc::Candidate>> lists(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& pred = model_.pred[i];
      lists[i].reserve(pred.size());
      for (std::size_t k = 0; k < pred.size(); ++k) {
        lists[i].push_back(
            {pk_.AddPlain(prev[static_cast<std::size_t>(pred[k])],
                          crypto::FromInt64(model_.transition_cost[i][k])),
             std::nullopt});
      }
    }
    const std::vector<stpc::Candidate> winners =
        comparisons_.RunTournaments(std::move(lists), executor);
    for (std::size_t i = 0; i < n; ++i) {
      theta[i] = pk_.Add(winners[i].value, emissions[i]);
    }
  }
  ++steps_since_restart_;

  const stpc::Candidate best = comparisons_.MinArgmin(theta, executor);
  costs_.t = obs.t;
  costs_.theta = std::move(theta);

  const stpc::StpcCounters& after = comparisons_.counters();
  last_step_.compare_ops = after.compare_ops - before.compare_ops;
  last_step_.round_trips = after.select_rounds - before.select_rounds;
  return pk_.Rerandomize(*best.index, rng_);
}

}  // namespace privloc::server
