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

#include "privloc/stpc/protocol.h"

#include <string>

#include "privloc/crypto/bigint.h"
#include "privloc/error.h"
#include "privloc/params.h"

namespace privloc::stpc {

void BlindingAudit::Record(const BigInt& value) {
  ++recorded_;
  if (!seen_.insert(value).second) ++duplicates_;
}

int TournamentRounds(std::size_t k) {
  int rounds = 0;
  for (std::size_t width = 1; width < k; width *= 2) ++rounds;
  return rounds;
}

ComparisonEngine::ComparisonEngine(const PublicKey& pk, RandomSource& rng,
                                   BlindingAudit* audit)
    : pk_(pk), rng_(rng), audit_(audit) {}

BigInt ComparisonEngine::DrawBlind(int bits) {
  BigInt v = rng_.UniformBits(bits);
  if (audit_ != nullptr) audit_->Record(v);
  return v;
}

BigInt ComparisonEngine::DrawScale() {
  // Uniform in [1, 2^KAPPA].
  BigInt s = rng_.UniformBits(kStatisticalBits) + 1;
  if (audit_ != nullptr) audit_->Record(s);
  return s;
}

std::pair<BlindedPair, PairBlinding> ComparisonEngine::Blind(
    const Candidate& x, const Candidate& y) {
  PairBlinding blinding;
  blinding.s = DrawScale();
  blinding.rho_x = DrawBlind(kBlindBits);
  blinding.rho_y = DrawBlind(kBlindBits);

  BlindedPair pair;
  const Ciphertext diff = pk_.Sub(x.value, y.value);
  pair.token = pk_.Rerandomize(pk_.ScalarMul(blinding.s, diff), rng_);
  pair.cx = pk_.Rerandomize(pk_.AddPlain(x.value, blinding.rho_x), rng_);
  pair.cy = pk_.Rerandomize(pk_.AddPlain(y.value, blinding.rho_y), rng_);

  if (x.index && y.index) {
    blinding.has_index = true;
    blinding.sigma_x = DrawBlind(kBlindBits);
    blinding.sigma_y = DrawBlind(kBlindBits);
    pair.ix = pk_.Rerandomize(pk_.AddPlain(*x.index, blinding.sigma_x), rng_);
    pair.iy = pk_.Rerandomize(pk_.AddPlain(*y.index, blinding.sigma_y), rng_);
  }
  return {std::move(pair), std::move(blinding)};
}

Candidate ComparisonEngine::Unblind(const SelectReply& reply,
                                    const PairBlinding& blinding) {
  pk_.Validate(reply.b);
  pk_.Validate(reply.value);
  if (blinding.has_index != reply.index.has_value()) {
    throw ProtocolError(kErrBadReply, "reply index presence does not match");
  }
  if (validator_ && !validator_(reply)) {
    throw ProtocolError(kErrBadReply,
                        "comparison reply failed validation; protocol aborted");
  }
  Candidate out;
  const BigInt delta = blinding.rho_x - blinding.rho_y;
  out.value = pk_.Add(pk_.AddPlain(reply.value, -blinding.rho_y),
                      pk_.ScalarMul(-delta, reply.b));
  if (blinding.has_index) {
    pk_.Validate(*reply.index);
    const BigInt idx_delta = blinding.sigma_x - blinding.sigma_y;
    out.index = pk_.Add(pk_.AddPlain(*reply.index, -blinding.sigma_y),
                        pk_.ScalarMul(-idx_delta, reply.b));
  }
  return out;
}

Candidate ComparisonEngine::CompareSelect(const Candidate& x,
                                          const Candidate& y,
                                          RoundExecutor& executor) {
  auto [pair, blinding] = Blind(x, y);
  const std::vector<SelectReply> replies = executor.SelectRound({pair});
  ++counters_.select_rounds;
  ++counters_.compare_ops;
  if (replies.size() != 1) {
    throw ProtocolError(kErrReplyCount, "expected exactly one select reply");
  }
  return Unblind(replies[0], blinding);
}

std::vector<Candidate> ComparisonEngine::RunTournaments(
    std::vector<std::vector<Candidate>> lists, RoundExecutor& executor) {
  for (auto& list : lists) {
    if (list.empty()) {
      throw ProtocolError(kErrEmptyTournament, "tournament over an empty list");
    }
    const std::vector<std::size_t> perm =
        crypto::RandomPermutation(list.size(), rng_);
    std::vector<Candidate> permuted;
    permuted.reserve(list.size());
    for (std::size_t p : perm) permuted.push_back(std::move(list[p]));
    list = std::move(permuted);
  }

  struct Slot {
    std::size_t list;
    std::size_t first;  // survivors[first] vs survivors[first + 1]
  };
  while (true) {
    std::vector<Slot> slots;
    std::vector<BlindedPair> batch;
    std::vector<PairBlinding> secrets;
    for (std::size_t l = 0; l < lists.size(); ++l) {
      for (std::size_t k = 0; k + 1 < lists[l].size(); k += 2) {
        auto [pair, blinding] = Blind(lists[l][k], lists[l][k + 1]);
        slots.push_back({l, k});
        batch.push_back(std::move(pair));
        secrets.push_back(std::move(blinding));
      }
    }
    if (batch.empty()) break;

    const std::vector<SelectReply> replies = executor.SelectRound(batch);
    ++counters_.select_rounds;
    counters_.compare_ops += batch.size();
    if (replies.size() != batch.size()) {
      throw ProtocolError(kErrReplyCount,
                          "round reply carries " +
                              std::to_string(replies.size()) +
                              " pairs, request had " +
                              std::to_string(batch.size()));
    }

    std::vector<std::vector<Candidate>> next(lists.size());
    for (std::size_t r = 0; r < replies.size(); ++r) {
      next[slots[r].list].push_back(Unblind(replies[r], secrets[r]));
    }
    for (std::size_t l = 0; l < lists.size(); ++l) {
      if (lists[l].size() % 2 == 1) {
        // The odd survivor passes through to the next round.
        next[l].push_back(std::move(lists[l].back()));
      }
    }
    lists = std::move(next);
  }

  std::vector<Candidate> winners;
  winners.reserve(lists.size());
  for (auto& list : lists) winners.push_back(std::move(list.front()));
  return winners;
}

Candidate ComparisonEngine::MinArgmin(const std::vector<Ciphertext>& values,
                                      RoundExecutor& executor) {
  std::vector<std::vector<Candidate>> lists(1);
  lists[0].reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    lists[0].push_back(
        {values[i], pk_.EncryptTrivial(static_cast<unsigned long>(i))});
  }
  return RunTournaments(std::move(lists), executor).front();
}

std::vector<Ciphertext> ComparisonEngine::Multiply(
    const std::vector<std::pair<Ciphertext, Ciphertext>>& operands,
    RoundExecutor& executor) {
  if (!KeySizeSupportsBlinding(pk_.key_bits())) {
    throw ProtocolError(kErrWeakKey,
                        "key too small for blinded multiplication");
  }
  std::vector<MulRequest> requests;
  std::vector<std::pair<BigInt, BigInt>> blinds;
  requests.reserve(operands.size());
  for (const auto& [x, y] : operands) {
    BigInt r1 = DrawBlind(kBlindBits);
    BigInt r2 = DrawBlind(kBlindBits);
    requests.push_back({pk_.Rerandomize(pk_.AddPlain(x, r1), rng_),
                        pk_.Rerandomize(pk_.AddPlain(y, r2), rng_)});
    blinds.emplace_back(std::move(r1), std::move(r2));
  }
  const std::vector<Ciphertext> products = executor.MultiplyRound(requests);
  ++counters_.multiply_rounds;
  counters_.multiplies += operands.size();
  if (products.size() != operands.size()) {
    throw ProtocolError(kErrReplyCount, "multiply reply count mismatch");
  }
  std::vector<Ciphertext> out;
  out.reserve(products.size());
  for (std::size_t i = 0; i < products.size(); ++i) {
    pk_.Validate(products[i]);
    const auto& [x, y] = operands[i];
    const auto& [r1, r2] = blinds[i];
    // (x + r1)(y + r2) - r1 y - r2 x - r1 r2
    Ciphertext c = pk_.Sub(products[i], pk_.ScalarMul(r1, y));
    c = pk_.Sub(c, pk_.ScalarMul(r2, x));
    out.push_back(pk_.AddPlain(c, -(r1 * r2)));
  }
  return out;
}

}  // namespace privloc::stpc
