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

// The key holder's side of the two-party building blocks.

#ifndef PRIVLOC_STPC_KEY_HOLDER_H_
#define PRIVLOC_STPC_KEY_HOLDER_H_

#include <functional>
#include <vector>

#include "privloc/crypto/private_key.h"
#include "privloc/stpc/protocol.h"

namespace privloc::stpc {

// What the key holder learned from a decryption.
enum class ViewKind { kToken, kMulOperand, kPosition };

using ViewObserver = std::function<void(ViewKind, const BigInt&)>;

class KeyHolder {
 public:
  KeyHolder(const crypto::PrivateKey& sk, RandomSource& rng);

  // Decrypts only the token. b = 1 iff token <= 0 (x < y, ties to x); the
  // chosen blinded value/index ciphertexts are returned rerandomized, which
  // is a fresh encryption of the same plaintext.
  SelectReply Answer(const BlindedPair& pair);
  std::vector<SelectReply> AnswerRound(const std::vector<BlindedPair>& pairs);

  // Enc((x + r1)(y + r2)).
  Ciphertext AnswerMultiply(const MulRequest& request);
  std::vector<Ciphertext> AnswerMultiplyRound(
      const std::vector<MulRequest>& requests);

  // Decrypts a reported position.
  BigInt DecryptPosition(const Ciphertext& c);

  void set_observer(ViewObserver observer) { observer_ = std::move(observer); }
  const crypto::PrivateKey& private_key() const { return sk_; }

 private:
  void Observe(ViewKind kind, const BigInt& v) {
    if (observer_) observer_(kind, v);
  }

  const crypto::PrivateKey& sk_;
  RandomSource& rng_;
  ViewObserver observer_;
};

// RoundExecutor that calls a KeyHolder directly, for in-process use.
class InProcessExecutor final : public RoundExecutor {
 public:
  explicit InProcessExecutor(KeyHolder& holder) : holder_(holder) {}
  std::vector<SelectReply> SelectRound(
      const std::vector<BlindedPair>& pairs) override;
  std::vector<Ciphertext> MultiplyRound(
      const std::vector<MulRequest>& requests) override;

  int round_trips() const { return round_trips_; }

 private:
  KeyHolder& holder_;
  int round_trips_ = 0;
};

}  // namespace privloc::stpc

#endif  // PRIVLOC_STPC_KEY_HOLDER_H_
