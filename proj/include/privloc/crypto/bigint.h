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

#ifndef PRIVLOC_CRYPTO_BIGINT_H_
#define PRIVLOC_CRYPTO_BIGINT_H_

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace privloc::crypto {

using BigInt = mpz_class;

// Minimal-length big-endian magnitude. Zero encodes as an empty array.
std::vector<std::uint8_t> ToBytes(const BigInt& value);
BigInt FromBytes(std::span<const std::uint8_t> bytes);

// Lower-case hexadecimal of a non-negative value, and its inverse.
std::string ToHex(const BigInt& value);
BigInt FromHex(std::string_view hex);

std::size_t BitLength(const BigInt& value);

BigInt FromInt64(std::int64_t v);
// Throws CryptoError if the value does not fit.
std::int64_t ToInt64(const BigInt& v);

// Maps a residue in [0, modulus) to the centered representative in
// (-modulus/2, modulus/2].
BigInt Centered(const BigInt& residue, const BigInt& modulus);

BigInt Mod(const BigInt& a, const BigInt& modulus);
BigInt PowMod(const BigInt& base, const BigInt& exp, const BigInt& modulus);
BigInt InvMod(const BigInt& a, const BigInt& modulus);

// |2^bits|
BigInt PowerOfTwo(int bits);

}  // namespace privloc::crypto

#endif  // PRIVLOC_CRYPTO_BIGINT_H_
