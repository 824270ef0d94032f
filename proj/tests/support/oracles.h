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

// Test-only oracles, independent of the code paths they check.

#ifndef PRIVLOC_TESTS_SUPPORT_ORACLES_H_
#define PRIVLOC_TESTS_SUPPORT_ORACLES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "privloc/crypto/private_key.h"
#include "privloc/hmm/model.h"

namespace privloc::testing {

// Random model: pred(i) holds i plus up to max_pred-1 random states, random
// outgoing probabilities per source, mu uniform in [-100, -30] dBm.
hmm::HmmModel RandomTestModel(std::size_t n, std::size_t max_pred,
                              std::size_t d, std::uint64_t seed);

// Random readings in [-100, -30] dBm, quantized to 0.1 dB.
std::vector<hmm::Observation> RandomTestObservations(std::size_t d,
                                                     std::size_t t,
                                                     std::uint64_t seed);

// For every prefix length t+1, the minimum cost over all
// predecessor-respecting paths, by exhaustive enumeration.
std::vector<hmm::Cost> BruteForceMinCosts(
    const hmm::HmmModel& model, const std::vector<hmm::Observation>& obs);

// round(value * scale) and round(-ln(p) * scale) via 256-bit MPFR.
std::int64_t MpfrScaled(const std::string& decimal, std::int64_t scale);
std::int64_t MpfrNegLog(const std::string& decimal_p, std::int64_t scale);

// One 1024-bit key pair per test binary, generated from a fixed seed.
const crypto::PrivateKey& TestKey1024();

}  // namespace privloc::testing

#endif  // PRIVLOC_TESTS_SUPPORT_ORACLES_H_
