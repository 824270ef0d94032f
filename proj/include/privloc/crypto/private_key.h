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

// Key-holder half of the Paillier cryptosystem. Only the client links this.

#ifndef PRIVLOC_CRYPTO_PRIVATE_KEY_H_
#define PRIVLOC_CRYPTO_PRIVATE_KEY_H_

#include <string>
#include <utility>

#include "privloc/crypto/paillier.h"

namespace privloc::crypto {

class PrivateKey {
 public:
  // p and q are the distinct prime factors of public.n().
  PrivateKey(PublicKey public_key, BigInt p, BigInt q);

  const PublicKey& public_key() const { return public_key_; }

  // Centered plaintext in (-n/2, n/2]. CRT over p^2 and q^2.
  BigInt Decrypt(const Ciphertext& c) const;

  // Decryption modulo p only. Exact whenever |m| < p/2, which holds for
  // every blinded token and blinded value in the protocol.
  BigInt DecryptSmall(const Ciphertext& c) const;

  std::string ToJson() const;
  static PrivateKey FromJson(const std::string& json);

 private:
  BigInt HalfDecrypt(const BigInt& c, const BigInt& prime,
                     const BigInt& prime_squared, const BigInt& h) const;

  PublicKey public_key_;
  BigInt p_, q_;
  BigInt p_squared_, q_squared_;
  BigInt hp_, hq_;
  BigInt p_inverse_mod_q_;
};

// Fresh random key pair. Throws CryptoError unless key_bits is 1024, 2048
// or 3072.
std::pair<PublicKey, PrivateKey> GenerateKeyPair(int key_bits,
                                                 RandomSource& rng);

}  // namespace privloc::crypto

#endif  // PRIVLOC_CRYPTO_PRIVATE_KEY_H_
