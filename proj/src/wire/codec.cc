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

#include <bit>
#include <cstring>
#include <stdexcept>

#include "privloc/wire/messages.h"

namespace privloc::wire {
namespace {

class Writer {
 public:
  void U8(std::uint8_t v) { out_.push_back(v); }
  void U16(std::uint16_t v) {
    U8(static_cast<std::uint8_t>(v >> 8));
    U8(static_cast<std::uint8_t>(v));
  }
  void U32(std::uint32_t v) {
    U16(static_cast<std::uint16_t>(v >> 16));
    U16(static_cast<std::uint16_t>(v));
  }
  void U64(std::uint64_t v) {
    U32(static_cast<std::uint32_t>(v >> 32));
    U32(static_cast<std::uint32_t>(v));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Bytes(std::span<const std::uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }
  void Big(const BigInt& v) {
    const auto bytes = crypto::ToBytes(v);
    if (bytes.size() > 0xFFFF) throw std::length_error("integer too large for wire");
    U16(static_cast<std::uint16_t>(bytes.size()));
    Bytes(bytes);
  }
  void Ct(const Ciphertext& c) { Big(c.value()); }
  void Count(std::size_t n) {
    if (n > 0xFFFFFFFFu) throw std::length_error("count too large for wire");
    U32(static_cast<std::uint32_t>(n));
  }
  std::vector<std::uint8_t>& out() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

struct DecodeFailure {
  DecodeError error;
  std::string detail;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, const DecodeContext& ctx)
      : in_(in), ctx_(ctx) {}

  std::uint8_t U8() {
    Need(1);
    return in_[pos_++];
  }
  std::uint16_t U16() {
    const std::uint16_t hi = U8();
    return static_cast<std::uint16_t>((hi << 8) | U8());
  }
  std::uint32_t U32() {
    const std::uint32_t hi = U16();
    return (hi << 16) | U16();
  }
  std::uint64_t U64() {
    const std::uint64_t hi = U32();
    return (hi << 32) | U32();
  }
  double F64() { return std::bit_cast<double>(U64()); }
  BigInt Big() {
    const std::size_t len = U16();
    Need(len);
    BigInt v = crypto::FromBytes(in_.subspan(pos_, len));
    if (len > 0 && in_[pos_] == 0) {
      throw DecodeFailure{DecodeError::kMalformed, "non-minimal integer encoding"};
    }
    pos_ += len;
    return v;
  }
  Ciphertext Ct() {
    Ciphertext c(Big());
    if (ctx_.key != nullptr && !ctx_.key->IsValid(c)) {
      throw DecodeFailure{DecodeError::kCiphertextOutOfRing,
                          "ciphertext outside Z*_{n^2}"};
    }
    return c;
  }
  // Reads a u32 element count, bounded by what the remaining bytes could
  // possibly hold.
  std::size_t Count(std::size_t min_element_size) {
    const std::size_t n = U32();
    if (n > remaining() / min_element_size) {
      throw DecodeFailure{DecodeError::kTruncated, "element count exceeds payload"};
    }
    return n;
  }
  void Need(std::size_t n) {
    if (remaining() < n) {
      throw DecodeFailure{DecodeError::kTruncated, "payload ends early"};
    }
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  std::span<const std::uint8_t> Take(std::size_t n) {
    Need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> in_;
  const DecodeContext& ctx_;
  std::size_t pos_ = 0;
};

constexpr std::uint8_t kHasIndex = 0x01;

struct PayloadWriter {
  Writer& w;

  void operator()(const Hello& m) {
    w.U16(m.version);
    w.U64(static_cast<std::uint64_t>(m.params.scale_f));
    w.U8(static_cast<std::uint8_t>(m.params.cost_bits));
    w.U8(static_cast<std::uint8_t>(m.params.kappa));
    w.Big(m.n);
    w.Big(m.hs);
  }
  void operator()(const HelloAck& m) {
    w.Bytes(m.model_digest);
    w.U16(m.max_pred);
    w.U16(m.num_aps);
    w.Count(m.states.size());
    for (const StateInfo& s : m.states) {
      w.F64(s.x);
      w.F64(s.y);
      w.U32(static_cast<std::uint32_t>(s.room));
    }
  }
  void operator()(const ObservationMsg& m) {
    w.U32(m.t);
    w.U16(static_cast<std::uint16_t>(m.values.size()));
    w.U16(static_cast<std::uint16_t>(m.squares.size()));
    for (const auto& c : m.values) w.Ct(c);
    for (const auto& c : m.squares) w.Ct(c);
  }
  void operator()(const RoundRequest& m) {
    w.Count(m.pairs.size());
    for (const auto& p : m.pairs) {
      w.U8(p.has_index() ? kHasIndex : 0);
      w.Ct(p.token);
      w.Ct(p.cx);
      w.Ct(p.cy);
      if (p.has_index()) {
        w.Ct(*p.ix);
        w.Ct(*p.iy);
      }
    }
  }
  void operator()(const RoundReply& m) {
    w.Count(m.replies.size());
    for (const auto& r : m.replies) {
      w.U8(r.index ? kHasIndex : 0);
      w.Ct(r.b);
      w.Ct(r.value);
      if (r.index) w.Ct(*r.index);
    }
  }
  void operator()(const PositionMsg& m) {
    w.U32(m.t);
    w.Ct(m.position);
  }
  void operator()(const MulRequestMsg& m) {
    w.Count(m.requests.size());
    for (const auto& r : m.requests) {
      w.Ct(r.x_blind);
      w.Ct(r.y_blind);
    }
  }
  void operator()(const MulReplyMsg& m) {
    w.Count(m.products.size());
    for (const auto& c : m.products) w.Ct(c);
  }
  void operator()(const ErrorMsg& m) {
    w.U16(m.code);
    const std::size_t len = std::min<std::size_t>(m.text.size(), 0xFFFF);
    w.U16(static_cast<std::uint16_t>(len));
    w.Bytes({reinterpret_cast<const std::uint8_t*>(m.text.data()), len});
  }
  void operator()(const Bye&) {}
};

std::uint8_t Flags(Reader& r) {
  const std::uint8_t f = r.U8();
  if ((f & ~kHasIndex) != 0) {
    throw DecodeFailure{DecodeError::kMalformed, "unknown flag bits"};
  }
  return f;
}

Body ReadBody(MessageType type, Reader& r) {
  // Smallest encodings: a ciphertext needs at least its 2-byte length.
  constexpr std::size_t kMinCt = 2;
  switch (type) {
    case MessageType::kHello: {
      Hello m;
      m.version = r.U16();
      m.params.scale_f = static_cast<std::int64_t>(r.U64());
      m.params.cost_bits = r.U8();
      m.params.kappa = r.U8();
      m.n = r.Big();
      m.hs = r.Big();
      return m;
    }
    case MessageType::kHelloAck: {
      HelloAck m;
      const auto digest = r.Take(m.model_digest.size());
      std::copy(digest.begin(), digest.end(), m.model_digest.begin());
      m.max_pred = r.U16();
      m.num_aps = r.U16();
      const std::size_t n = r.Count(20);
      m.states.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        StateInfo s;
        s.x = r.F64();
        s.y = r.F64();
        s.room = static_cast<std::int32_t>(r.U32());
        m.states.push_back(s);
      }
      return m;
    }
    case MessageType::kObservation: {
      ObservationMsg m;
      m.t = r.U32();
      const std::size_t values = r.U16();
      const std::size_t squares = r.U16();
      if (values != squares) {
        throw DecodeFailure{DecodeError::kCountMismatch,
                            "observation value and square counts differ"};
      }
      for (std::size_t i = 0; i < values; ++i) m.values.push_back(r.Ct());
      for (std::size_t i = 0; i < squares; ++i) m.squares.push_back(r.Ct());
      return m;
    }
    case MessageType::kRoundRequest: {
      RoundRequest m;
      const std::size_t n = r.Count(1 + 3 * kMinCt);
      m.pairs.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t f = Flags(r);
        stpc::BlindedPair p;
        p.token = r.Ct();
        p.cx = r.Ct();
        p.cy = r.Ct();
        if (f & kHasIndex) {
          p.ix = r.Ct();
          p.iy = r.Ct();
        }
        m.pairs.push_back(std::move(p));
      }
      return m;
    }
    case MessageType::kRoundReply: {
      RoundReply m;
      const std::size_t n = r.Count(1 + 2 * kMinCt);
      m.replies.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t f = Flags(r);
        stpc::SelectReply s;
        s.b = r.Ct();
        s.value = r.Ct();
        if (f & kHasIndex) s.index = r.Ct();
        m.replies.push_back(std::move(s));
      }
      return m;
    }
    case MessageType::kPosition: {
      PositionMsg m;
      m.t = r.U32();
      m.position = r.Ct();
      return m;
    }
    case MessageType::kMulRequest: {
      MulRequestMsg m;
      const std::size_t n = r.Count(2 * kMinCt);
      for (std::size_t i = 0; i < n; ++i) {
        stpc::MulRequest q;
        q.x_blind = r.Ct();
        q.y_blind = r.Ct();
        m.requests.push_back(std::move(q));
      }
      return m;
    }
    case MessageType::kMulReply: {
      MulReplyMsg m;
      const std::size_t n = r.Count(kMinCt);
      for (std::size_t i = 0; i < n; ++i) m.products.push_back(r.Ct());
      return m;
    }
    case MessageType::kError: {
      ErrorMsg m;
      m.code = r.U16();
      const std::size_t len = r.U16();
      const auto text = r.Take(len);
      m.text.assign(text.begin(), text.end());
      return m;
    }
    case MessageType::kBye:
      return Bye{};
  }
  throw DecodeFailure{DecodeError::kUnknownType, "unknown message type"};
}

bool KnownType(std::uint8_t t) {
  return (t >= 1 && t <= 8) || t == 15 || t == 16;
}

}  // namespace

MessageType Message::type() const {
  static constexpr MessageType kTypes[] = {
      MessageType::kHello,       MessageType::kHelloAck,
      MessageType::kObservation, MessageType::kRoundRequest,
      MessageType::kRoundReply,  MessageType::kPosition,
      MessageType::kMulRequest,  MessageType::kMulReply,
      MessageType::kError,       MessageType::kBye};
  return kTypes[body.index()];
}

const char* DecodeErrorName(DecodeError e) {
  switch (e) {
    case DecodeError::kNone: return "none";
    case DecodeError::kTruncated: return "truncated";
    case DecodeError::kOversize: return "oversize";
    case DecodeError::kUnknownType: return "unknown-type";
    case DecodeError::kMalformed: return "malformed";
    case DecodeError::kCountMismatch: return "count-mismatch";
    case DecodeError::kCiphertextOutOfRing: return "ciphertext-out-of-ring";
  }
  return "unknown";
}

std::vector<std::uint8_t> EncodeFrame(const Message& message) {
  Writer payload;
  std::visit(PayloadWriter{payload}, message.body);
  const std::size_t size = payload.out().size();
  if (size > kMaxPayload) throw std::length_error("frame payload exceeds 64 MiB");

  Writer frame;
  frame.out().reserve(kHeaderSize + size);
  frame.U32(static_cast<std::uint32_t>(size));
  frame.U8(static_cast<std::uint8_t>(message.type()));
  frame.Bytes(message.session);
  frame.Bytes(payload.out());
  return std::move(frame.out());
}

std::uint32_t PeekPayloadLength(std::span<const std::uint8_t> header) {
  return (static_cast<std::uint32_t>(header[0]) << 24) |
         (static_cast<std::uint32_t>(header[1]) << 16) |
         (static_cast<std::uint32_t>(header[2]) << 8) |
         static_cast<std::uint32_t>(header[3]);
}

DecodeOutcome DecodeFrame(std::span<const std::uint8_t> bytes,
                          const DecodeContext& context) {
  DecodeOutcome out;
  try {
    if (bytes.size() < kHeaderSize) {
      out.error = DecodeError::kTruncated;
      out.detail = "frame shorter than its header";
      return out;
    }
    const std::uint32_t length = PeekPayloadLength(bytes);
    if (length > kMaxPayload) {
      out.error = DecodeError::kOversize;
      out.detail = "payload length " + std::to_string(length) + " exceeds 64 MiB";
      return out;
    }
    const std::uint8_t type = bytes[4];
    if (!KnownType(type)) {
      out.error = DecodeError::kUnknownType;
      out.detail = "message type " + std::to_string(type);
      return out;
    }
    if (bytes.size() - kHeaderSize < length) {
      out.error = DecodeError::kTruncated;
      out.detail = "payload shorter than announced";
      return out;
    }
    if (bytes.size() - kHeaderSize > length) {
      out.error = DecodeError::kMalformed;
      out.detail = "trailing bytes after payload";
      return out;
    }
    Message m;
    std::copy(bytes.begin() + 5, bytes.begin() + kHeaderSize, m.session.begin());
    Reader reader(bytes.subspan(kHeaderSize), context);
    m.body = ReadBody(static_cast<MessageType>(type), reader);
    if (reader.remaining() != 0) {
      out.error = DecodeError::kMalformed;
      out.detail = "payload has unparsed trailing bytes";
      return out;
    }
    out.message = std::move(m);
  } catch (const DecodeFailure& f) {
    out.error = f.error;
    out.detail = f.detail;
  } catch (const std::exception& e) {
    out.error = DecodeError::kMalformed;
    out.detail = e.what();
  }
  return out;
}

}  // namespace privloc::wire
