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

#include "privloc/crypto/private_key.h"

#include "json.hpp"
#include "privloc/error.h"

namespace privloc::crypto {
namespace {

// L(x) = (x - 1) / d
BigInt LFunction(const BigInt& x, const BigInt& d) { return (x - 1) / d; }

BigInt RandomPrime(int bits, RandomSource& rng) {
  while (true) {
    BigInt candidate = rng.UniformBits(bits);
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    BigInt prime;
    mpz_nextprime(prime.get_mpz_t(), candidate.get_mpz_t());
    if (BitLength(prime) != static_cast<std::size_t>(bits)) continue;
    if (mpz_probab_prime_p(prime.get_mpz_t(), 40) == 0) continue;
    return prime;
  }
}

}  // namespace

PrivateKey::PrivateKey(PublicKey public_key, BigInt p, BigInt q)
    : public_key_(std::move(public_key)), p_(std::move(p)), q_(std::move(q)) {
  if (p_ == q_ || p_ * q_ != public_key_.n()) {
    throw CryptoError("private factors do not match the public modulus");
  }
  p_squared_ = p_ * p_;
  q_squared_ = q_ * q_;
  const BigInt g = public_key_.n() + 1;
  hp_ = InvMod(LFunction(PowMod(g, p_ - 1, p_squared_), p_), p_);
  hq_ = InvMod(LFunction(PowMod(g, q_ - 1, q_squared_), q_), q_);
  p_inverse_mod_q_ = InvMod(p_, q_);
}

BigInt PrivateKey::HalfDecrypt(const BigInt& c, const BigInt& prime,
                               const BigInt& prime_squared,
                               const BigInt& h) const {
  BigInt u = PowMod(Mod(c, prime_squared), prime - 1, prime_squared);
  return Mod(LFunction(u, prime) * h, prime);
}

BigInt PrivateKey::Decrypt(const Ciphertext& c) const {
  public_key_.Validate(c);
  const BigInt mp = HalfDecrypt(c.value(), p_, p_squared_, hp_);
  const BigInt mq = HalfDecrypt(c.value(), q_, q_squared_, hq_);
  // Garner: m = mp + p * ((mq - mp) * p^-1 mod q)
  const BigInt m = mp + p_ * Mod((mq - mp) * p_inverse_mod_q_, q_);
  return Centered(m, public_key_.n());
}

BigInt PrivateKey::DecryptSmall(const Ciphertext& c) const {
  public_key_.Validate(c);
  return Centered(HalfDecrypt(c.value(), p_, p_squared_, hp_), p_);
}

std::string PrivateKey::ToJson() const {
  nlohmann::json j = nlohmann::json::parse(public_key_.ToJson());
  j["p"] = ToHex(p_);
  j["q"] = ToHex(q_);
  return j.dump();
}

PrivateKey PrivateKey::FromJson(const std::string& text) {
  PublicKey pk = PublicKey::FromJson(text);
  const nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("p") || !j.contains("q") || !j["p"].is_string() ||
      !j["q"].is_string()) {
    throw CryptoError("private key JSON must carry p and q");
  }
  return PrivateKey(std::move(pk), FromHex(j["p"].get<std::string>()),
                    FromHex(j["q"].get<std::string>()));
}

std::pair<PublicKey, PrivateKey> GenerateKeyPair(int key_bits,
                                                 RandomSource& rng) {
  if (!IsSupportedKeySize(key_bits)) {
    throw CryptoError("unsupported key size " + std::to_string(key_bits) +
                      " (expected 1024, 2048 or 3072)");
  }
  const int half = key_bits / 2;
  while (true) {
    BigInt p = RandomPrime(half, rng);
    BigInt q = RandomPrime(half, rng);
    if (p == q) continue;
    BigInt n = p * q;
    if (BitLength(n) != static_cast<std::size_t>(key_bits)) continue;
    BigInt phi = (p - 1) * (q - 1);
    BigInt g;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
    if (g != 1) continue;

    // hs = (-x^2)^n mod n^2 generates the randomizer subgroup.
    BigInt x;
    do {
      x = rng.UniformBelow(n);
      mpz_gcd(g.get_mpz_t(), x.get_mpz_t(), n.get_mpz_t());
    } while (x == 0 || g != 1);
    const BigInt h = Mod(-(x * x), n);
    BigInt hs = PowMod(h, n, n * n);

    PublicKey pk(n, std::move(hs));
    PrivateKey sk(pk, std::move(p), std::move(q));
    return {std::move(pk), std::move(sk)};
  }
}

}  // namespace privloc::crypto
