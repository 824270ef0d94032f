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

// Wire messages and the normative frame codec.
//
// Frame layout (big-endian):
//   u32 length      payload bytes following the 21-byte header
//   u8  msg_type
//   u8[16] session_id
//   payload
// Big integers inside payloads are u16 byte length + minimal magnitude.

#ifndef PRIVLOC_WIRE_MESSAGES_H_
#define PRIVLOC_WIRE_MESSAGES_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "privloc/crypto/paillier.h"
#include "privloc/params.h"
#include "privloc/stpc/protocol.h"

namespace privloc::wire {

using crypto::BigInt;
using crypto::Ciphertext;

inline constexpr std::size_t kHeaderSize = 21;
inline constexpr std::uint32_t kMaxPayload = 64u << 20;  // 64 MiB
inline constexpr std::uint16_t kDefaultPort = 7451;

enum class MessageType : std::uint8_t {
  kHello = 1,
  kHelloAck = 2,
  kObservation = 3,
  kRoundRequest = 4,
  kRoundReply = 5,
  kPosition = 6,
  kMulRequest = 7,
  kMulReply = 8,
  kError = 15,
  kBye = 16,
};

using SessionId = std::array<std::uint8_t, 16>;

// Codes carried by ERROR frames.
enum ErrorCode : std::uint16_t {
  kErrVersionMismatch = 1,
  kErrWeakKey = 2,
  kErrParamMismatch = 3,
  kErrMalformedFrame = 4,
  kErrUnexpectedMessage = 5,
  kErrCountMismatch = 6,
  kErrOutOfOrder = 7,
  kErrCostOverflow = 8,
  kErrUnknownSession = 9,
  kErrInternal = 10,
};

struct Hello {
  std::uint16_t version = kProtocolVersion;
  BigInt n;
  BigInt hs;
  FixedPointParams params;
  bool operator==(const Hello&) const = default;
};

// Public, per-state metadata: what a decoded state id means.
struct StateInfo {
  double x = 0.0;
  double y = 0.0;
  std::int32_t room = 0;
  bool operator==(const StateInfo&) const = default;
};

struct HelloAck {
  std::array<std::uint8_t, 32> model_digest{};
  // Largest predecessor count N'; the client can expect
  // ceil(log2 N') + ceil(log2 N) rounds per step.
  std::uint16_t max_pred = 0;
  std::uint16_t num_aps = 0;
  std::vector<StateInfo> states;
  bool operator==(const HelloAck&) const = default;
};

struct ObservationMsg {
  std::uint32_t t = 0;
  std::vector<Ciphertext> values;
  std::vector<Ciphertext> squares;
  bool operator==(const ObservationMsg&) const = default;
};

struct RoundRequest {
  std::vector<stpc::BlindedPair> pairs;
  bool operator==(const RoundRequest&) const = default;
};

struct RoundReply {
  std::vector<stpc::SelectReply> replies;
  bool operator==(const RoundReply&) const = default;
};

struct PositionMsg {
  std::uint32_t t = 0;
  Ciphertext position;
  bool operator==(const PositionMsg&) const = default;
};

struct MulRequestMsg {
  std::vector<stpc::MulRequest> requests;
  bool operator==(const MulRequestMsg&) const = default;
};

struct MulReplyMsg {
  std::vector<Ciphertext> products;
  bool operator==(const MulReplyMsg&) const = default;
};

struct ErrorMsg {
  std::uint16_t code = 0;
  std::string text;
  bool operator==(const ErrorMsg&) const = default;
};

struct Bye {
  bool operator==(const Bye&) const = default;
};

using Body = std::variant<Hello, HelloAck, ObservationMsg, RoundRequest,
                          RoundReply, PositionMsg, MulRequestMsg, MulReplyMsg,
                          ErrorMsg, Bye>;

struct Message {
  SessionId session{};
  Body body;

  MessageType type() const;
  bool operator==(const Message&) const = default;
};

enum class DecodeError {
  kNone,
  kTruncated,
  kOversize,
  kUnknownType,
  kMalformed,
  kCountMismatch,
  kCiphertextOutOfRing,
};

const char* DecodeErrorName(DecodeError e);

struct DecodeOutcome {
  std::optional<Message> message;
  DecodeError error = DecodeError::kNone;
  std::string detail;

  bool ok() const { return message.has_value(); }
};

// When a key is supplied, every ciphertext is checked for membership in
// Z*_{n^2}.
struct DecodeContext {
  const crypto::PublicKey* key = nullptr;
};

std::vector<std::uint8_t> EncodeFrame(const Message& message);

// Total: never throws, reports every failure through DecodeOutcome.
DecodeOutcome DecodeFrame(std::span<const std::uint8_t> bytes,
                          const DecodeContext& context = {});

// Payload length announced by a header, or an error for oversize lengths.
// Requires at least kHeaderSize bytes.
std::uint32_t PeekPayloadLength(std::span<const std::uint8_t> header);

}  // namespace privloc::wire

#endif  // PRIVLOC_WIRE_MESSAGES_H_
