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

#include "privloc/crypto/random.h"

#include <sodium.h>

#include <numeric>
#include <vector>

#include "privloc/error.h"

namespace privloc::crypto {

BigInt RandomSource::UniformBits(int bits) {
  if (bits <= 0) return 0;
  std::vector<std::uint8_t> buf((static_cast<std::size_t>(bits) + 7) / 8);
  Fill(buf);
  const int excess = static_cast<int>(buf.size() * 8) - bits;
  buf[0] &= static_cast<std::uint8_t>(0xFFu >> excess);
  return FromBytes(buf);
}

BigInt RandomSource::UniformBelow(const BigInt& bound) {
  if (bound <= 0) throw CryptoError("UniformBelow requires a positive bound");
  const int bits = static_cast<int>(BitLength(bound));
  while (true) {
    BigInt candidate = UniformBits(bits);
    if (candidate < bound) return candidate;
  }
}

std::uint64_t RandomSource::UniformIndex(std::uint64_t bound) {
  if (bound == 0) throw CryptoError("UniformIndex requires a positive bound");
  // Largest multiple of bound that fits, to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  while (true) {
    std::uint8_t buf[8];
    Fill(buf);
    std::uint64_t v = 0;
    for (std::uint8_t b : buf) v = (v << 8) | b;
    if (v < limit) return v % bound;
  }
}

SystemRandom::SystemRandom() {
  if (sodium_init() < 0) throw CryptoError("libsodium initialization failed");
}

void SystemRandom::Fill(std::span<std::uint8_t> out) {
  randombytes_buf(out.data(), out.size());
}

std::vector<std::size_t> RandomPermutation(std::size_t size,
                                           RandomSource& rng) {
  std::vector<std::size_t> perm(size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = size; i > 1; --i) {
    const std::size_t j = rng.UniformIndex(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace privloc::crypto
