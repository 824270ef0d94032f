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

// Message bodies and server-side machinery of the two-party building blocks:
// blinded compare-and-select, lockstep min/argmin tournaments and blinded
// interactive multiplication. The server side only ever holds the public key.

#ifndef PRIVLOC_STPC_PROTOCOL_H_
#define PRIVLOC_STPC_PROTOCOL_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "privloc/crypto/paillier.h"
#include "privloc/crypto/random.h"

namespace privloc::stpc {

using crypto::BigInt;
using crypto::Ciphertext;
using crypto::PublicKey;
using crypto::RandomSource;

// Server -> client. token = Enc(s (x - y)), cx = Enc(x + rho_x),
// cy = Enc(y + rho_y), and optionally ix/iy = Enc(idx + sigma).
struct BlindedPair {
  Ciphertext token;
  Ciphertext cx;
  Ciphertext cy;
  std::optional<Ciphertext> ix;
  std::optional<Ciphertext> iy;

  bool has_index() const { return ix.has_value() && iy.has_value(); }
  bool operator==(const BlindedPair&) const = default;
};

// Client -> server. b = Enc(1) iff x <= y; value and index are fresh
// encryptions of the chosen blinded value and blinded index.
struct SelectReply {
  Ciphertext b;
  Ciphertext value;
  std::optional<Ciphertext> index;

  bool operator==(const SelectReply&) const = default;
};

// Server-side secrets of one BlindedPair. Single use.
struct PairBlinding {
  BigInt s;
  BigInt rho_x, rho_y;
  BigInt sigma_x, sigma_y;
  bool has_index = false;
};

struct MulRequest {
  Ciphertext x_blind;
  Ciphertext y_blind;
  bool operator==(const MulRequest&) const = default;
};

// One (value, index) entry of a tournament. The index is absent in
// value-only tournaments.
struct Candidate {
  Ciphertext value;
  std::optional<Ciphertext> index;
};

// Transport to the key holder. One call = one protocol round trip.
class RoundExecutor {
 public:
  virtual ~RoundExecutor() = default;
  virtual std::vector<SelectReply> SelectRound(
      const std::vector<BlindedPair>& pairs) = 0;
  virtual std::vector<Ciphertext> MultiplyRound(
      const std::vector<MulRequest>& requests) = 0;
};

// Records every blinding value drawn in a session and counts repeats.
class BlindingAudit {
 public:
  void Record(const BigInt& value);
  std::size_t recorded() const { return recorded_; }
  std::size_t duplicates() const { return duplicates_; }

 private:
  std::set<BigInt> seen_;
  std::size_t recorded_ = 0;
  std::size_t duplicates_ = 0;
};

struct StpcCounters {
  std::uint64_t compare_ops = 0;
  std::uint64_t select_rounds = 0;
  std::uint64_t multiplies = 0;
  std::uint64_t multiply_rounds = 0;
};

// Optional check applied to every reply; returning false aborts the
// protocol. The server holds no key, so only a key-holding harness can
// supply a meaningful check (for example, that b decrypts to 0 or 1).
using ReplyValidator = std::function<bool(const SelectReply&)>;

// Protocol error codes carried by ProtocolError.
inline constexpr int kErrBadReply = 20;
inline constexpr int kErrReplyCount = 21;
inline constexpr int kErrWeakKey = 22;
inline constexpr int kErrEmptyTournament = 23;

class ComparisonEngine {
 public:
  ComparisonEngine(const PublicKey& pk, RandomSource& rng,
                   BlindingAudit* audit = nullptr);

  void set_reply_validator(ReplyValidator v) { validator_ = std::move(v); }

  // Requires |x|, |y| < 2^L_COST. The index pair is blinded when both
  // candidates carry an index.
  std::pair<BlindedPair, PairBlinding> Blind(const Candidate& x,
                                             const Candidate& y);

  // [min] = [m_blind] - rho_y - (rho_x - rho_y) [b], likewise for the index.
  Candidate Unblind(const SelectReply& reply, const PairBlinding& blinding);

  // One compare-and-select round trip.
  Candidate CompareSelect(const Candidate& x, const Candidate& y,
                          RoundExecutor& executor);

  // Runs one tournament per list in lockstep; every round of all
  // tournaments shares a single SelectRound call. Each list is randomly
  // permuted once. Returns the winner of each list.
  std::vector<Candidate> RunTournaments(
      std::vector<std::vector<Candidate>> lists, RoundExecutor& executor);

  // Minimum and argmin over values; the index ciphertext of the winner
  // encrypts its position in `values`.
  Candidate MinArgmin(const std::vector<Ciphertext>& values,
                      RoundExecutor& executor);

  // [x_i * y_i] for each pair via blinded multiplication. Refuses to start
  // when the key is too small for the blinding relation.
  std::vector<Ciphertext> Multiply(
      const std::vector<std::pair<Ciphertext, Ciphertext>>& operands,
      RoundExecutor& executor);

  const StpcCounters& counters() const { return counters_; }
  const PublicKey& public_key() const { return pk_; }

 private:
  BigInt DrawBlind(int bits);
  BigInt DrawScale();

  PublicKey pk_;
  RandomSource& rng_;
  BlindingAudit* audit_;
  ReplyValidator validator_;
  StpcCounters counters_;
};

// Number of SelectRound calls a tournament over k candidates takes.
int TournamentRounds(std::size_t k);

}  // namespace privloc::stpc

#endif  // PRIVLOC_STPC_PROTOCOL_H_
