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

// Encrypted Viterbi recursion. Holds only the client's public key.

#ifndef PRIVLOC_SERVER_ENGINE_H_
#define PRIVLOC_SERVER_ENGINE_H_

#include <cstdint>
#include <vector>

#include "privloc/crypto/paillier.h"
#include "privloc/hmm/model.h"
#include "privloc/stpc/protocol.h"
#include "privloc/wire/messages.h"

namespace privloc::server {

using crypto::Ciphertext;
using EncryptedObservation = wire::ObservationMsg;

inline constexpr std::int64_t kDefaultHorizon = 1000;

// [theta_t(i)] for every state, at scale f^2.
struct CostVector {
  std::int64_t t = -1;
  std::vector<Ciphertext> theta;
};

struct StepCounters {
  std::uint64_t compare_ops = 0;
  std::uint64_t round_trips = 0;
};

struct EngineOptions {
  // Steps after which theta restarts from the initial costs.
  std::int64_t horizon = kDefaultHorizon;
};

class ViterbiEngine {
 public:
  ViterbiEngine(const hmm::HmmModel& model, const crypto::PublicKey& pk,
                crypto::RandomSource& rng, EngineOptions options = {},
                stpc::BlindingAudit* audit = nullptr);

  // [e_i] = sum_d [r_d^2] - 2 mu_id [r_d] + mu_id^2 for every state.
  // Purely local: no protocol round trips.
  std::vector<Ciphertext> ComputeEmissionCosts(
      const EncryptedObservation& obs) const;

  // One recursion step followed by the argmin tournament. Returns the
  // rerandomized encryption of the most likely state id.
  Ciphertext Step(const EncryptedObservation& obs,
                  stpc::RoundExecutor& executor);

  const CostVector& costs() const { return costs_; }
  // Counters of the most recent Step.
  const StepCounters& last_step() const { return last_step_; }
  std::int64_t next_t() const { return costs_.t + 1; }

  void set_reply_validator(stpc::ReplyValidator v) {
    comparisons_.set_reply_validator(std::move(v));
  }

 private:
  const hmm::HmmModel& model_;
  crypto::PublicKey pk_;
  crypto::RandomSource& rng_;
  EngineOptions options_;
  stpc::ComparisonEngine comparisons_;
  hmm::Cost max_increment_;
  CostVector costs_;
  std::int64_t steps_since_restart_ = 0;
  StepCounters last_step_;
};

}  // namespace privloc::server

#endif  // PRIVLOC_SERVER_ENGINE_H_
