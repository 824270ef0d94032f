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

#ifndef PRIVLOC_CRYPTO_RANDOM_H_
#define PRIVLOC_CRYPTO_RANDOM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "privloc/crypto/bigint.h"

namespace privloc::crypto {

// Source of uniformly random bytes. Protocol code draws every key, blind,
// permutation and session id through this interface.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void Fill(std::span<std::uint8_t> out) = 0;

  // Uniform in [0, 2^bits).
  BigInt UniformBits(int bits);
  // Uniform in [0, bound), bound > 0. Rejection sampling.
  BigInt UniformBelow(const BigInt& bound);
  // Uniform in [0, bound), bound > 0.
  std::uint64_t UniformIndex(std::uint64_t bound);
};

// Operating-system CSPRNG (libsodium randombytes). Thread-safe.
class SystemRandom final : public RandomSource {
 public:
  SystemRandom();
  void Fill(std::span<std::uint8_t> out) override;
};

// Fisher-Yates permutation of [0, size).
std::vector<std::size_t> RandomPermutation(std::size_t size, RandomSource& rng);

}  // namespace privloc::crypto

#endif  // PRIVLOC_CRYPTO_RANDOM_H_
