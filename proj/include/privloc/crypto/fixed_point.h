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

#ifndef PRIVLOC_CRYPTO_FIXED_POINT_H_
#define PRIVLOC_CRYPTO_FIXED_POINT_H_

#include <cstdint>

namespace privloc::crypto {

// round(x * scale), half away from zero. Throws CryptoError when the result
// would not satisfy |v| < 2^L_COST or x is not finite.
std::int64_t FpEncode(double x, std::int64_t scale);

double FpDecode(std::int64_t v, std::int64_t scale);

}  // namespace privloc::crypto

#endif  // PRIVLOC_CRYPTO_FIXED_POINT_H_
