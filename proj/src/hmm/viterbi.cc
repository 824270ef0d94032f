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

#include "privloc/hmm/viterbi.h"

#include <limits>

#include "privloc/error.h"

namespace privloc::hmm {
namespace {

Cost AddCosts(Cost a, Cost b) {
  Cost out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw ModelError("accumulated cost exceeds 2^L_COST");
  }
  return out;
}

}  // namespace

DecodeResult ViterbiPlain(const HmmModel& model,
                          const std::vector<Observation>& observations,
                          const ViterbiOptions& options) {
  if (observations.empty()) throw ModelError("no observations to decode");
  const std::size_t n = model.size();
  DecodeResult result;
  // back[t][i]: predecessor chosen for state i at step t, -1 on restarts.
  std::vector<std::vector<int>> back;
  std::vector<Cost> prev;

  for (std::size_t t = 0; t < observations.size(); ++t) {
    const bool restart =
        t == 0 || (options.horizon != 0 && t % options.horizon == 0);
    std::vector<Cost> theta(n);
    std::vector<int> choice(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      Cost base;
      if (restart) {
        base = model.initial_cost[i];
      } else {
        base = std::numeric_limits<Cost>::max();
        const auto& pred = model.pred[i];
        for (std::size_t k = 0; k < pred.size(); ++k) {
          const Cost c = AddCosts(prev[static_cast<std::size_t>(pred[k])],
                                  model.transition_cost[i][k]);
          if (c < base || (c == base && pred[k] < choice[i])) {
            base = c;
            choice[i] = pred[k];
          }
        }
      }
      theta[i] = AddCosts(base, EmissionCost(model, i, observations[t]));
    }

    std::size_t best = 0;
    int ties = 1;
    for (std::size_t i = 1; i < n; ++i) {
      if (theta[i] < theta[best]) {
        best = i;
        ties = 1;
      } else if (theta[i] == theta[best]) {
        ++ties;
      }
    }
    result.states.push_back(static_cast<int>(best));
    result.min_costs.push_back(theta[best]);
    result.unique_minimizer.push_back(ties == 1);
    result.costs.push_back(theta);
    back.push_back(std::move(choice));
    prev = std::move(theta);
  }

  result.path.resize(observations.size());
  int current = result.states.back();
  for (std::size_t t = observations.size(); t-- > 0;) {
    result.path[t] = current;
    if (t > 0) {
      const int p = back[t][static_cast<std::size_t>(current)];
      // A restart boundary has no predecessor; fall back to that step's argmin.
      current = p >= 0 ? p : result.states[t - 1];
    }
  }
  return result;
}

}  // namespace privloc::hmm
