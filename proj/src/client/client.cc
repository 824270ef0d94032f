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

#include "privloc/client/client.h"

#include <chrono>
#include <utility>

#include "privloc/hmm/model.h"

namespace privloc::client {

using wire::Message;

wire::ObservationMsg EncryptObservation(const crypto::PublicKey& pk,
                                        std::uint32_t t,
                                        std::span<const double> rssi_dbm,
                                        crypto::RandomSource& rng) {
  const hmm::Observation plain = hmm::MakeObservation(t, rssi_dbm);
  wire::ObservationMsg out;
  out.t = t;
  out.values.reserve(plain.rssi.size());
  out.squares.reserve(plain.rssi.size());
  for (std::size_t d = 0; d < plain.rssi.size(); ++d) {
    out.values.push_back(pk.Encrypt(plain.rssi[d], rng));
    out.squares.push_back(pk.Encrypt(plain.rssi_sq[d], rng));
  }
  return out;
}

ClientSession::ClientSession(const crypto::PrivateKey& sk,
                             wire::Channel& channel, crypto::RandomSource& rng)
    : sk_(sk), channel_(channel), rng_(rng), holder_(sk, rng) {}

void ClientSession::Send(wire::Body body) {
  wire::SendMessage(channel_, {session_, std::move(body)});
}

void ClientSession::Abort(int code, const std::string& text, bool notify) {
  if (notify) {
    try {
      Send(wire::ErrorMsg{static_cast<std::uint16_t>(code), text});
    } catch (const Error&) {
    }
  }
  throw StepError(code, next_t_, text);
}

void ClientSession::Handshake() {
  const crypto::PublicKey& pk = sk_.public_key();
  Send(wire::Hello{kProtocolVersion, pk.n(), pk.hs(), FixedPointParams{}});
  Message m = wire::ReceiveMessage(channel_);
  if (const auto* err = std::get_if<wire::ErrorMsg>(&m.body)) {
    throw ProtocolError(err->code, "server refused session: " + err->text);
  }
  auto* ack = std::get_if<wire::HelloAck>(&m.body);
  if (ack == nullptr) {
    throw ProtocolError(wire::kErrUnexpectedMessage, "expected HELLO_ACK");
  }
  if (ack->states.empty()) {
    throw ProtocolError(wire::kErrMalformedFrame, "server published no states");
  }
  session_ = m.session;
  ack_ = std::move(*ack);
  established_ = true;
}

Position ClientSession::Localize(std::span<const double> rssi_dbm) {
  if (!established_) throw Error("handshake not completed");
  if (rssi_dbm.size() != ack_.num_aps) {
    throw StepError(wire::kErrCountMismatch, next_t_,
                    "trace has " + std::to_string(rssi_dbm.size()) +
                        " readings, server model expects " +
                        std::to_string(ack_.num_aps));
  }
  const std::uint32_t t = static_cast<std::uint32_t>(next_t_);
  const wire::ObservationMsg obs =
      EncryptObservation(sk_.public_key(), t, rssi_dbm, rng_);

  const wire::TrafficStats before = channel_.stats();
  const auto start = std::chrono::steady_clock::now();
  Send(obs);
  const wire::DecodeContext ctx{&sk_.public_key()};
  std::uint64_t rounds = 0;

  while (true) {
    Message m;
    try {
      m = wire::ReceiveMessage(channel_, ctx);
    } catch (const ProtocolError& e) {
      Abort(e.code(), e.what(), true);
    } catch (const wire::ChannelClosed& e) {
      Abort(wire::kErrInternal, e.what(), false);
    }
    if (const auto* err = std::get_if<wire::ErrorMsg>(&m.body)) {
      Abort(err->code, "server error: " + err->text, false);
    }
    if (m.session != session_) {
      Abort(wire::kErrUnknownSession, "frame for another session", true);
    }
    if (auto* req = std::get_if<wire::RoundRequest>(&m.body)) {
      ++rounds;
      std::vector<stpc::SelectReply> replies;
      try {
        replies = holder_.AnswerRound(req->pairs);
      } catch (const CryptoError& e) {
        Abort(wire::kErrMalformedFrame, e.what(), true);
      }
      Send(wire::RoundReply{std::move(replies)});
      continue;
    }
    if (auto* req = std::get_if<wire::MulRequestMsg>(&m.body)) {
      ++rounds;
      std::vector<crypto::Ciphertext> products;
      try {
        products = holder_.AnswerMultiplyRound(req->requests);
      } catch (const CryptoError& e) {
        Abort(wire::kErrMalformedFrame, e.what(), true);
      }
      Send(wire::MulReplyMsg{std::move(products)});
      continue;
    }
    auto* pos = std::get_if<wire::PositionMsg>(&m.body);
    if (pos == nullptr) {
      Abort(wire::kErrUnexpectedMessage, "unexpected message during step",
            true);
    }
    if (pos->t != t) {
      Abort(wire::kErrOutOfOrder, "position for a different step", true);
    }
    const crypto::BigInt id = holder_.DecryptPosition(pos->position);
    if (id < 0 || id >= static_cast<long>(ack_.states.size())) {
      Abort(wire::kErrMalformedFrame,
            "position id outside the published state map", true);
    }
    const auto stop = std::chrono::steady_clock::now();
    const wire::TrafficStats& after = channel_.stats();
    stats_.push_back(
        {next_t_,
         std::chrono::duration<double, std::milli>(stop - start).count(),
         after.bytes_sent - before.bytes_sent,
         after.bytes_received - before.bytes_received, rounds});

    Position p;
    p.t = next_t_;
    p.state = static_cast<int>(id.get_si());
    const wire::StateInfo& info = ack_.states[static_cast<std::size_t>(p.state)];
    p.room = info.room;
    p.x = info.x;
    p.y = info.y;
    ++next_t_;
    return p;
  }
}

std::vector<Position> ClientSession::RunTrace(
    const std::vector<std::vector<double>>& trace) {
  std::vector<Position> out;
  out.reserve(trace.size());
  for (const auto& rssi : trace) out.push_back(Localize(rssi));
  return out;
}

void ClientSession::Close() {
  if (!established_) return;
  try {
    Send(wire::Bye{});
  } catch (const Error&) {
  }
  established_ = false;
}

}  // namespace privloc::client
