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

#include "privloc/crypto/fixed_point.h"

#include <cmath>

#include "privloc/error.h"
#include "privloc/params.h"

namespace privloc::crypto {

std::int64_t FpEncode(double x, std::int64_t scale) {
  if (scale <= 0) throw CryptoError("fixed-point scale must be positive");
  if (!std::isfinite(x)) throw CryptoError("cannot encode a non-finite value");
  const long double scaled = std::roundl(static_cast<long double>(x) *
                                         static_cast<long double>(scale));
  // 2^63 is exactly representable in long double.
  const long double bound = std::ldexp(1.0L, kCostBits);
  if (std::fabs(scaled) >= bound) {
    throw CryptoError("fixed-point value exceeds 2^L_COST");
  }
  return static_cast<std::int64_t>(scaled);
}

double FpDecode(std::int64_t v, std::int64_t scale) {
  if (scale <= 0) throw CryptoError("fixed-point scale must be positive");
  return static_cast<double>(static_cast<long double>(v) /
                             static_cast<long double>(scale));
}

}  // namespace privloc::crypto
