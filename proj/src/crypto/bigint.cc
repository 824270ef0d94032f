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

#include "privloc/crypto/bigint.h"

#include <limits>

#include "privloc/error.h"

namespace privloc::crypto {

std::vector<std::uint8_t> ToBytes(const BigInt& value) {
  if (value < 0) throw CryptoError("cannot serialize a negative integer");
  if (value == 0) return {};
  const std::size_t size = (mpz_sizeinbase(value.get_mpz_t(), 2) + 7) / 8;
  std::vector<std::uint8_t> out(size);
  std::size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, value.get_mpz_t());
  out.resize(written);
  return out;
}

BigInt FromBytes(std::span<const std::uint8_t> bytes) {
  BigInt out;
  if (!bytes.empty()) {
    mpz_import(out.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  }
  return out;
}

std::string ToHex(const BigInt& value) {
  if (value < 0) throw CryptoError("cannot hex-encode a negative integer");
  return value.get_str(16);
}

BigInt FromHex(std::string_view hex) {
  if (hex.empty()) throw CryptoError("empty hex string");
  for (char c : hex) {
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') ||
                    (c >= 'A' && c <= 'F');
    if (!ok) throw CryptoError("invalid hex digit");
  }
  return BigInt(std::string(hex), 16);
}

std::size_t BitLength(const BigInt& value) {
  if (value == 0) return 0;
  return mpz_sizeinbase(value.get_mpz_t(), 2);
}

BigInt FromInt64(std::int64_t v) {
  BigInt out;
  // mpz_set_si takes a long, which is 64-bit on every supported target.
  static_assert(sizeof(long) == sizeof(std::int64_t));
  mpz_set_si(out.get_mpz_t(), static_cast<long>(v));
  return out;
}

std::int64_t ToInt64(const BigInt& v) {
  if (!mpz_fits_slong_p(v.get_mpz_t())) {
    throw CryptoError("integer does not fit in 64 bits");
  }
  return static_cast<std::int64_t>(mpz_get_si(v.get_mpz_t()));
}

BigInt Centered(const BigInt& residue, const BigInt& modulus) {
  BigInt r = Mod(residue, modulus);
  BigInt half = modulus / 2;
  if (r > half) r -= modulus;
  return r;
}

BigInt Mod(const BigInt& a, const BigInt& modulus) {
  BigInt r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), modulus.get_mpz_t());
  return r;
}

BigInt PowMod(const BigInt& base, const BigInt& exp, const BigInt& modulus) {
  BigInt r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(),
           modulus.get_mpz_t());
  return r;
}

BigInt InvMod(const BigInt& a, const BigInt& modulus) {
  BigInt r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), modulus.get_mpz_t()) == 0) {
    throw CryptoError("value is not invertible");
  }
  return r;
}

BigInt PowerOfTwo(int bits) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, static_cast<unsigned long>(bits));
  return r;
}

}  // namespace privloc::crypto
