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

#include "privloc/crypto/paillier.h"

#include <algorithm>
#include <numeric>

#include "json.hpp"
#include "privloc/error.h"
#include "privloc/params.h"

namespace privloc::crypto {

bool IsSupportedKeySize(int key_bits) {
  return key_bits == 1024 || key_bits == 2048 || key_bits == 3072;
}

std::vector<std::uint8_t> Ciphertext::ToBytes() const {
  return crypto::ToBytes(value_);
}

FixedBasePow::FixedBasePow(const BigInt& base, const BigInt& modulus,
                           int exp_bits, int window_bits)
    : modulus_(modulus), exp_bits_(exp_bits), window_bits_(window_bits) {
  const int windows = (exp_bits + window_bits - 1) / window_bits;
  const int per_window = (1 << window_bits) - 1;
  table_.reserve(static_cast<std::size_t>(windows * per_window));
  BigInt window_base = Mod(base, modulus);
  BigInt tmp;
  for (int i = 0; i < windows; ++i) {
    BigInt acc = window_base;
    table_.push_back(acc);
    for (int j = 2; j <= per_window; ++j) {
      mpz_mul(tmp.get_mpz_t(), acc.get_mpz_t(), window_base.get_mpz_t());
      mpz_mod(acc.get_mpz_t(), tmp.get_mpz_t(), modulus.get_mpz_t());
      table_.push_back(acc);
    }
    // Next window base = window_base^(2^w) = acc * window_base.
    mpz_mul(tmp.get_mpz_t(), acc.get_mpz_t(), window_base.get_mpz_t());
    mpz_mod(window_base.get_mpz_t(), tmp.get_mpz_t(), modulus.get_mpz_t());
  }
}

BigInt FixedBasePow::Pow(const BigInt& exponent) const {
  if (exponent < 0 || BitLength(exponent) > static_cast<std::size_t>(exp_bits_)) {
    throw CryptoError("fixed-base exponent out of range");
  }
  const int per_window = (1 << window_bits_) - 1;
  BigInt result = 1;
  BigInt tmp;
  const std::size_t bits = BitLength(exponent);
  for (std::size_t i = 0; i * window_bits_ < bits; ++i) {
    unsigned digit = 0;
    for (int b = window_bits_ - 1; b >= 0; --b) {
      digit = (digit << 1) |
              mpz_tstbit(exponent.get_mpz_t(), i * window_bits_ + b);
    }
    if (digit == 0) continue;
    const BigInt& entry = table_[i * per_window + (digit - 1)];
    mpz_mul(tmp.get_mpz_t(), result.get_mpz_t(), entry.get_mpz_t());
    mpz_mod(result.get_mpz_t(), tmp.get_mpz_t(), modulus_.get_mpz_t());
  }
  return result;
}

PublicKey::PublicKey(BigInt n, BigInt hs) {
  if (n <= 3 || mpz_even_p(n.get_mpz_t())) {
    throw CryptoError("public modulus must be an odd integer > 3");
  }
  auto impl = std::make_shared<Impl>();
  impl->key_bits = static_cast<int>(BitLength(n));
  impl->n_squared = n * n;
  impl->half_n = n / 2;
  if (hs <= 1 || hs >= impl->n_squared) {
    throw CryptoError("randomizer generator out of range");
  }
  BigInt g;
  mpz_gcd(g.get_mpz_t(), hs.get_mpz_t(), n.get_mpz_t());
  if (g != 1) throw CryptoError("randomizer generator shares a factor with n");
  impl->randomizer = std::make_unique<FixedBasePow>(hs, impl->n_squared,
                                                    kRandomizerBits);
  impl->n = std::move(n);
  impl->hs = std::move(hs);
  impl_ = std::move(impl);
}

BigInt PublicKey::Randomizer(RandomSource& rng) const {
  return impl_->randomizer->Pow(rng.UniformBits(kRandomizerBits));
}

BigInt PublicKey::Reduce(const BigInt& m) const { return Mod(m, impl_->n); }

Ciphertext PublicKey::EncryptTrivial(const BigInt& m) const {
  // (1 + n)^m = 1 + m n (mod n^2)
  BigInt c = Reduce(m) * impl_->n + 1;
  return Ciphertext(Mod(c, impl_->n_squared));
}

Ciphertext PublicKey::Encrypt(const BigInt& m, RandomSource& rng) const {
  if (BitLength(abs(m)) > static_cast<std::size_t>(kCostBits)) {
    throw CryptoError("plaintext magnitude exceeds 2^L_COST");
  }
  return EncryptWide(m, rng);
}

Ciphertext PublicKey::Encrypt(std::int64_t m, RandomSource& rng) const {
  return Encrypt(FromInt64(m), rng);
}

Ciphertext PublicKey::EncryptWide(const BigInt& m, RandomSource& rng) const {
  if (abs(m) > impl_->half_n) {
    throw CryptoError("plaintext outside the centered ring");
  }
  BigInt c = EncryptTrivial(m).value() * Randomizer(rng);
  return Ciphertext(Mod(c, impl_->n_squared));
}

Ciphertext PublicKey::Add(const Ciphertext& a, const Ciphertext& b) const {
  return Ciphertext(Mod(a.value() * b.value(), impl_->n_squared));
}

Ciphertext PublicKey::Negate(const Ciphertext& a) const {
  return Ciphertext(InvMod(a.value(), impl_->n_squared));
}

Ciphertext PublicKey::Sub(const Ciphertext& a, const Ciphertext& b) const {
  return Add(a, Negate(b));
}

Ciphertext PublicKey::AddPlain(const Ciphertext& a, const BigInt& m) const {
  return Add(a, EncryptTrivial(m));
}

Ciphertext PublicKey::ScalarMul(const BigInt& k, const Ciphertext& c) const {
  if (k == 0) return EncryptTrivial(0);
  if (k < 0) {
    return Ciphertext(PowMod(Negate(c).value(), -k, impl_->n_squared));
  }
  return Ciphertext(PowMod(c.value(), k, impl_->n_squared));
}

Ciphertext PublicKey::Rerandomize(const Ciphertext& c,
                                  RandomSource& rng) const {
  return Ciphertext(Mod(c.value() * Randomizer(rng), impl_->n_squared));
}

namespace {

std::vector<BigInt> PowerRow(const BigInt& base, const BigInt& mod,
                             int size) {
  std::vector<BigInt> row;
  row.reserve(static_cast<std::size_t>(size));
  row.push_back(base);
  BigInt tmp;
  for (int j = 2; j <= size; ++j) {
    mpz_mul(tmp.get_mpz_t(), row.back().get_mpz_t(), base.get_mpz_t());
    BigInt next;
    mpz_mod(next.get_mpz_t(), tmp.get_mpz_t(), mod.get_mpz_t());
    row.push_back(std::move(next));
  }
  return row;
}

}  // namespace

MultiExpTable::MultiExpTable(const PublicKey& pk,
                             std::span<const Ciphertext> bases,
                             bool allow_negative, int window_bits)
    : modulus_(pk.n_squared()),
      window_(window_bits),
      allow_negative_(allow_negative) {
  if (window_bits < 1 || window_bits > 8) {
    throw CryptoError("window must be 1..8 bits");
  }
  const int size = (1 << window_) - 1;
  positive_.reserve(bases.size());
  for (const Ciphertext& c : bases) {
    positive_.push_back(PowerRow(c.value(), modulus_, size));
    if (allow_negative_) {
      negative_.push_back(PowerRow(InvMod(c.value(), modulus_), modulus_, size));
    }
  }
}

Ciphertext MultiExpTable::Combine(std::span<const BigInt> exponents) const {
  if (exponents.size() != positive_.size()) {
    throw CryptoError("linear combination size mismatch");
  }
  std::size_t max_bits = 0;
  for (const BigInt& e : exponents) {
    if (e < 0 && !allow_negative_) {
      throw CryptoError("negative exponent without inverse tables");
    }
    max_bits = std::max(max_bits, BitLength(abs(e)));
  }
  BigInt acc = 1;
  if (max_bits == 0) return Ciphertext(std::move(acc));

  std::vector<BigInt> magnitudes(exponents.size());
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    magnitudes[i] = abs(exponents[i]);
  }
  const std::size_t w_bits = static_cast<std::size_t>(window_);
  const std::size_t windows = (max_bits + w_bits - 1) / w_bits;
  BigInt tmp;
  for (std::size_t w = windows; w-- > 0;) {
    if (w + 1 != windows) {
      for (int s = 0; s < window_; ++s) {
        mpz_mul(tmp.get_mpz_t(), acc.get_mpz_t(), acc.get_mpz_t());
        mpz_mod(acc.get_mpz_t(), tmp.get_mpz_t(), modulus_.get_mpz_t());
      }
    }
    for (std::size_t i = 0; i < magnitudes.size(); ++i) {
      unsigned digit = 0;
      for (std::size_t b = w_bits; b-- > 0;) {
        digit = (digit << 1) |
                mpz_tstbit(magnitudes[i].get_mpz_t(), w * w_bits + b);
      }
      if (digit == 0) continue;
      const auto& row = exponents[i] < 0 ? negative_[i] : positive_[i];
      mpz_mul(tmp.get_mpz_t(), acc.get_mpz_t(), row[digit - 1].get_mpz_t());
      mpz_mod(acc.get_mpz_t(), tmp.get_mpz_t(), modulus_.get_mpz_t());
    }
  }
  return Ciphertext(std::move(acc));
}

Ciphertext PublicKey::LinearCombination(
    std::span<const Ciphertext> bases,
    std::span<const BigInt> exponents) const {
  if (bases.size() != exponents.size()) {
    throw CryptoError("linear combination size mismatch");
  }
  bool negative = false;
  for (const BigInt& e : exponents) negative = negative || e < 0;
  return MultiExpTable(*this, bases, negative, 4).Combine(exponents);
}

bool PublicKey::IsValid(const Ciphertext& c) const {
  if (c.value() <= 0 || c.value() >= impl_->n_squared) return false;
  BigInt g;
  mpz_gcd(g.get_mpz_t(), c.value().get_mpz_t(), impl_->n.get_mpz_t());
  return g == 1;
}

void PublicKey::Validate(const Ciphertext& c) const {
  if (!IsValid(c)) {
    throw CryptoError("ciphertext outside Z*_{n^2}");
  }
}

Ciphertext PublicKey::CiphertextFromBytes(
    std::span<const std::uint8_t> bytes) const {
  Ciphertext c(FromBytes(bytes));
  Validate(c);
  return c;
}

std::string PublicKey::ToJson() const {
  nlohmann::json j;
  j["n"] = ToHex(n());
  j["hs"] = ToHex(hs());
  j["key_bits"] = key_bits();
  return j.dump();
}

PublicKey PublicKey::FromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CryptoError(std::string("malformed key JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("hs") ||
      !j.contains("key_bits") || !j["n"].is_string() || !j["hs"].is_string() ||
      !j["key_bits"].is_number_integer()) {
    throw CryptoError("key JSON must carry string n, hs and integer key_bits");
  }
  PublicKey pk(FromHex(j["n"].get<std::string>()),
               FromHex(j["hs"].get<std::string>()));
  if (pk.key_bits() != j["key_bits"].get<int>()) {
    throw CryptoError("key_bits does not match the modulus");
  }
  return pk;
}

}  // namespace privloc::crypto
