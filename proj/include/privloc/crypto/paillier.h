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

// Public half of the Paillier cryptosystem: encryption, homomorphic
// operations and rerandomization. Nothing in this header can decrypt; the
// private key lives in its own header, in a separate library.

#ifndef PRIVLOC_CRYPTO_PAILLIER_H_
#define PRIVLOC_CRYPTO_PAILLIER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "privloc/crypto/bigint.h"
#include "privloc/crypto/random.h"

namespace privloc::crypto {

// Key sizes accepted by keygen and by the session handshake.
bool IsSupportedKeySize(int key_bits);

// Bits of the short exponent used to derive encryption randomizers.
inline constexpr int kRandomizerBits = 256;

// An element of Z*_{n^2}, always reduced.
class Ciphertext {
 public:
  Ciphertext() = default;
  explicit Ciphertext(BigInt value) : value_(std::move(value)) {}

  const BigInt& value() const { return value_; }
  std::vector<std::uint8_t> ToBytes() const;

  bool operator==(const Ciphertext& other) const {
    return value_ == other.value_;
  }

 private:
  BigInt value_;
};

// base^e mod m for a fixed base and exponents below 2^exp_bits, using a
// precomputed table of base^(j * 2^(w*i)). Costs exp_bits/w multiplications.
class FixedBasePow {
 public:
  FixedBasePow(const BigInt& base, const BigInt& modulus, int exp_bits,
               int window_bits = 8);
  BigInt Pow(const BigInt& exponent) const;

 private:
  BigInt modulus_;
  int exp_bits_;
  int window_bits_;
  // table_[i * (2^w - 1) + (j - 1)] = base^(j * 2^(w*i))
  std::vector<BigInt> table_;
};

class PublicKey;

// Window tables for a fixed list of ciphertexts, so that many linear
// combinations over the same bases share the precomputation.
class MultiExpTable {
 public:
  MultiExpTable(const PublicKey& pk, std::span<const Ciphertext> bases,
                bool allow_negative = true, int window_bits = 5);

  // prod_i bases[i]^exponents[i] mod n^2.
  Ciphertext Combine(std::span<const BigInt> exponents) const;
  std::size_t size() const { return positive_.size(); }

 private:
  BigInt modulus_;
  int window_;
  bool allow_negative_;
  // positive_[i][j-1] = bases[i]^j; negative_ likewise for the inverse.
  std::vector<std::vector<BigInt>> positive_;
  std::vector<std::vector<BigInt>> negative_;
};

class PublicKey {
 public:
  // hs must be an n-th residue modulo n^2 generating the randomizer subgroup.
  PublicKey(BigInt n, BigInt hs);

  const BigInt& n() const { return impl_->n; }
  const BigInt& n_squared() const { return impl_->n_squared; }
  const BigInt& hs() const { return impl_->hs; }
  int key_bits() const { return impl_->key_bits; }

  // Enc(m) for a centered plaintext with |m| < 2^L_COST.
  Ciphertext Encrypt(const BigInt& m, RandomSource& rng) const;
  Ciphertext Encrypt(std::int64_t m, RandomSource& rng) const;
  // Enc(m) for any centered plaintext in (-n/2, n/2].
  Ciphertext EncryptWide(const BigInt& m, RandomSource& rng) const;
  // Deterministic encryption with unit randomness, (1 + m n) mod n^2.
  // Only for values that are rerandomized before leaving the process.
  Ciphertext EncryptTrivial(const BigInt& m) const;

  Ciphertext Add(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext Sub(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext Negate(const Ciphertext& a) const;
  Ciphertext AddPlain(const Ciphertext& a, const BigInt& m) const;
  Ciphertext ScalarMul(const BigInt& k, const Ciphertext& c) const;
  Ciphertext Rerandomize(const Ciphertext& c, RandomSource& rng) const;

  // prod_i bases[i]^exponents[i] mod n^2, i.e. Enc(sum k_i m_i), by
  // interleaved windowed exponentiation. Exponents may be negative.
  Ciphertext LinearCombination(std::span<const Ciphertext> bases,
                               std::span<const BigInt> exponents) const;

  // Throws CryptoError unless 0 < c < n^2 and gcd(c, n) = 1.
  void Validate(const Ciphertext& c) const;
  bool IsValid(const Ciphertext& c) const;

  // Parses a ciphertext and validates ring membership.
  Ciphertext CiphertextFromBytes(std::span<const std::uint8_t> bytes) const;

  // Canonical JSON {"n": hex, "hs": hex, "key_bits": int}.
  std::string ToJson() const;
  static PublicKey FromJson(const std::string& json);

  bool operator==(const PublicKey& other) const {
    return n() == other.n() && hs() == other.hs();
  }

 private:
  struct Impl {
    BigInt n;
    BigInt n_squared;
    BigInt hs;
    BigInt half_n;
    int key_bits = 0;
    std::unique_ptr<FixedBasePow> randomizer;
  };
  BigInt Randomizer(RandomSource& rng) const;
  BigInt Reduce(const BigInt& m) const;

  std::shared_ptr<const Impl> impl_;
};

}  // namespace privloc::crypto

#endif  // PRIVLOC_CRYPTO_PAILLIER_H_
