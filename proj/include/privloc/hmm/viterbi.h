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

#ifndef PRIVLOC_HMM_VITERBI_H_
#define PRIVLOC_HMM_VITERBI_H_

#include <cstddef>
#include <vector>

#include "privloc/hmm/model.h"

namespace privloc::hmm {

struct DecodeResult {
  // Per step: argmin_i theta_t(i), lowest id on ties.
  std::vector<int> states;
  // Per step: min_i theta_t(i).
  std::vector<Cost> min_costs;
  // Per step: whether the minimizer is unique.
  std::vector<bool> unique_minimizer;
  // Per step: the full theta_t vector.
  std::vector<std::vector<Cost>> costs;
  // Most likely path, backtracked from the final step.
  std::vector<int> path;
};

struct ViterbiOptions {
  // Restart from the initial costs every horizon steps; 0 disables.
  std::size_t horizon = 0;
};

// Exact integer Viterbi in negative-log space. Throws ModelError for an
// empty observation list or on cost overflow.
DecodeResult ViterbiPlain(const HmmModel& model,
                          const std::vector<Observation>& observations,
                          const ViterbiOptions& options = {});

}  // namespace privloc::hmm

#endif  // PRIVLOC_HMM_VITERBI_H_
