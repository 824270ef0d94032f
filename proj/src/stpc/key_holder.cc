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

#include "privloc/stpc/key_holder.h"

#include "privloc/error.h"

namespace privloc::stpc {

KeyHolder::KeyHolder(const crypto::PrivateKey& sk, RandomSource& rng)
    : sk_(sk), rng_(rng) {}

SelectReply KeyHolder::Answer(const BlindedPair& pair) {
  const PublicKey& pk = sk_.public_key();
  const BigInt token = sk_.DecryptSmall(pair.token);
  Observe(ViewKind::kToken, token);
  const bool x_wins = token <= 0;

  pk.Validate(pair.cx);
  pk.Validate(pair.cy);
  SelectReply reply;
  reply.b = pk.Encrypt(x_wins ? 1 : 0, rng_);
  reply.value = pk.Rerandomize(x_wins ? pair.cx : pair.cy, rng_);
  if (pair.has_index()) {
    pk.Validate(*pair.ix);
    pk.Validate(*pair.iy);
    reply.index = pk.Rerandomize(x_wins ? *pair.ix : *pair.iy, rng_);
  } else if (pair.ix || pair.iy) {
    throw ProtocolError(kErrBadReply, "blinded pair carries a single index");
  }
  return reply;
}

std::vector<SelectReply> KeyHolder::AnswerRound(
    const std::vector<BlindedPair>& pairs) {
  std::vector<SelectReply> out;
  out.reserve(pairs.size());
  for (const BlindedPair& p : pairs) out.push_back(Answer(p));
  return out;
}

Ciphertext KeyHolder::AnswerMultiply(const MulRequest& request) {
  const BigInt a = sk_.DecryptSmall(request.x_blind);
  const BigInt b = sk_.DecryptSmall(request.y_blind);
  Observe(ViewKind::kMulOperand, a);
  Observe(ViewKind::kMulOperand, b);
  return sk_.public_key().EncryptWide(a * b, rng_);
}

std::vector<Ciphertext> KeyHolder::AnswerMultiplyRound(
    const std::vector<MulRequest>& requests) {
  std::vector<Ciphertext> out;
  out.reserve(requests.size());
  for (const MulRequest& r : requests) out.push_back(AnswerMultiply(r));
  return out;
}

BigInt KeyHolder::DecryptPosition(const Ciphertext& c) {
  const BigInt v = sk_.Decrypt(c);
  Observe(ViewKind::kPosition, v);
  return v;
}

std::vector<SelectReply> InProcessExecutor::SelectRound(
    const std::vector<BlindedPair>& pairs) {
  ++round_trips_;
  return holder_.AnswerRound(pairs);
}

std::vector<Ciphertext> InProcessExecutor::MultiplyRound(
    const std::vector<MulRequest>& requests) {
  ++round_trips_;
  return holder_.AnswerMultiplyRound(requests);
}

}  // namespace privloc::stpc
