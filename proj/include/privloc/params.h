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

#ifndef PRIVLOC_PARAMS_H_
#define PRIVLOC_PARAMS_H_

#include <cstdint>

namespace privloc {

// Fixed-point and blinding parameters shared by both parties.
//
// Measurements are scaled by kMeasurementScale (five decimal places). Every
// cost-domain value (emission, transition, initial and accumulated costs) is
// scaled by kCostScale = kMeasurementScale^2 so that products of two scaled
// measurements land on the cost scale without any rescaling.
inline constexpr std::int64_t kMeasurementScale = 100000;
inline constexpr std::int64_t kCostScale = kMeasurementScale * kMeasurementScale;

// Bit bound on the magnitude of any cost (L_COST).
inline constexpr int kCostBits = 63;
// Statistical blinding parameter in bits (KAPPA).
inline constexpr int kStatisticalBits = 40;
// Additive blinds are drawn from [0, 2^kBlindBits).
inline constexpr int kBlindBits = kCostBits + kStatisticalBits;

inline constexpr int kProtocolVersion = 1;

struct FixedPointParams {
  std::int64_t scale_f = kMeasurementScale;
  std::int64_t cost_scale = kCostScale;
  int cost_bits = kCostBits;
  int kappa = kStatisticalBits;

  bool operator==(const FixedPointParams&) const = default;
};

// Blinded values (x + rho) and their pairwise products must stay below n/2:
// key_bits/2 > 2 * (L_COST + KAPPA) + 2.
constexpr bool KeySizeSupportsBlinding(int key_bits, int cost_bits = kCostBits,
                                       int kappa = kStatisticalBits) {
  return key_bits / 2 > 2 * (cost_bits + kappa) + 2;
}

}  // namespace privloc

#endif  // PRIVLOC_PARAMS_H_
