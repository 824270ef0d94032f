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

#include "privloc/server/session.h"

#include <sodium.h>

#include <chrono>
#include <utility>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "privloc/error.h"
#include "privloc/hmm/model_io.h"

namespace privloc::server {
namespace {

using wire::Message;
using wire::MessageType;

std::string ShortId(const wire::SessionId& id) {
  static const char kHex[] = "0123456789abcdef";
  std::string s;
  for (int i = 0; i < 4; ++i) {
    s += kHex[id[i] >> 4];
    s += kHex[id[i] & 15];
  }
  return s;
}

}  // namespace

std::string StepRecord::ToJson() const {
  nlohmann::ordered_json j;
  j["t"] = t;
  j["wall_ms"] = wall_ms;
  j["bytes_up"] = bytes_up;
  j["bytes_down"] = bytes_down;
  j["round_trips"] = round_trips;
  j["cmp_ops"] = cmp_ops;
  return j.dump();
}

std::array<std::uint8_t, 32> ModelDigest(const hmm::HmmModel& model) {
  static_assert(crypto_hash_sha256_BYTES == 32);
  const std::string canonical = hmm::ModelToJson(model);
  std::array<std::uint8_t, 32> out;
  crypto_hash_sha256(out.data(),
                     reinterpret_cast<const unsigned char*>(canonical.data()),
                     canonical.size());
  return out;
}

ModelHost::ModelHost(hmm::HmmModel model) : model_(std::move(model)) {
  hmm::ValidateModel(model_);
  if (model_.size() > 0xffff || model_.num_aps > 0xffff ||
      model_.max_predecessors() > 0xffff) {
    throw ModelError("model dimensions exceed the wire limits");
  }
  ack_.model_digest = ModelDigest(model_);
  ack_.max_pred = static_cast<std::uint16_t>(model_.max_predecessors());
  ack_.num_aps = static_cast<std::uint16_t>(model_.num_aps);
  ack_.states.reserve(model_.size());
  for (const hmm::StateMeta& s : model_.states) {
    ack_.states.push_back({s.x, s.y, s.room});
  }
}

std::uint16_t WireErrorCode(int code) {
  switch (code) {
    case stpc::kErrBadReply:
      return wire::kErrMalformedFrame;
    case stpc::kErrReplyCount:
      return wire::kErrCountMismatch;
    case stpc::kErrWeakKey:
      return wire::kErrWeakKey;
    case stpc::kErrEmptyTournament:
      return wire::kErrInternal;
    default:
      if (code >= wire::kErrVersionMismatch && code <= wire::kErrInternal) {
        return static_cast<std::uint16_t>(code);
      }
      return wire::kErrInternal;
  }
}

Message ChannelExecutor::Receive() {
  Message m = wire::ReceiveMessage(channel_, context_);
  if (const auto* err = std::get_if<wire::ErrorMsg>(&m.body)) {
    peer_error_ = true;
    throw ProtocolError(err->code, "client reported error: " + err->text);
  }
  if (m.session != session_) {
    throw ProtocolError(wire::kErrUnknownSession, "frame for unknown session");
  }
  return m;
}

std::vector<stpc::SelectReply> ChannelExecutor::SelectRound(
    const std::vector<stpc::BlindedPair>& pairs) {
  wire::SendMessage(channel_, {session_, wire::RoundRequest{pairs}});
  ++round_trips_;
  Message m = Receive();
  auto* reply = std::get_if<wire::RoundReply>(&m.body);
  if (reply == nullptr) {
    throw ProtocolError(wire::kErrUnexpectedMessage,
                        "expected ROUND_REPLY");
  }
  if (reply->replies.size() != pairs.size()) {
    throw ProtocolError(wire::kErrCountMismatch,
                        "ROUND_REPLY carries " +
                            std::to_string(reply->replies.size()) +
                            " replies for " + std::to_string(pairs.size()) +
                            " pairs");
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].has_index() != reply->replies[i].index.has_value()) {
      throw ProtocolError(wire::kErrMalformedFrame,
                          "reply index presence does not match request");
    }
  }
  return std::move(reply->replies);
}

std::vector<Ciphertext> ChannelExecutor::MultiplyRound(
    const std::vector<stpc::MulRequest>& requests) {
  wire::SendMessage(channel_, {session_, wire::MulRequestMsg{requests}});
  ++round_trips_;
  Message m = Receive();
  auto* reply = std::get_if<wire::MulReplyMsg>(&m.body);
  if (reply == nullptr) {
    throw ProtocolError(wire::kErrUnexpectedMessage, "expected MUL_REPLY");
  }
  if (reply->products.size() != requests.size()) {
    throw ProtocolError(wire::kErrCountMismatch,
                        "MUL_REPLY count does not match MUL_REQUEST");
  }
  return std::move(reply->products);
}

ServerSession::ServerSession(const ModelHost& host, wire::Channel& channel,
                             crypto::RandomSource& rng, SessionOptions options)
    : host_(host), channel_(channel), rng_(rng), options_(std::move(options)) {
  rng_.Fill(id_);
}

void ServerSession::Send(wire::Body body) {
  wire::SendMessage(channel_, {id_, std::move(body)});
}

void ServerSession::Fail(int code, const std::string& text, bool notify_peer) {
  error_code_ = code;
  error_text_ = text;
  spdlog::warn("session {}: error {} after {} steps: {}", ShortId(id_), code,
               steps_, text);
  if (!notify_peer) return;
  try {
    Send(wire::ErrorMsg{WireErrorCode(code), text});
  } catch (const Error&) {
    // Peer already gone.
  }
}

void ServerSession::Handshake() {
  Message m = wire::ReceiveMessage(channel_);
  auto* hello = std::get_if<wire::Hello>(&m.body);
  if (hello == nullptr) {
    throw ProtocolError(wire::kErrUnexpectedMessage, "expected HELLO");
  }
  if (hello->version != kProtocolVersion) {
    throw ProtocolError(wire::kErrVersionMismatch,
                        "protocol version " + std::to_string(hello->version) +
                            " not supported; server speaks " +
                            std::to_string(kProtocolVersion));
  }
  if (hello->params != FixedPointParams{}) {
    throw ProtocolError(wire::kErrParamMismatch,
                        "fixed-point parameters do not match the server's");
  }
  try {
    key_ = std::make_unique<crypto::PublicKey>(hello->n, hello->hs);
  } catch (const CryptoError& e) {
    throw ProtocolError(wire::kErrWeakKey, e.what());
  }
  const int bits = key_->key_bits();
  if (!crypto::IsSupportedKeySize(bits) || !KeySizeSupportsBlinding(bits)) {
    throw ProtocolError(wire::kErrWeakKey,
                        "key size " + std::to_string(bits) +
                            " does not satisfy the blinding relation");
  }
  Send(host_.hello_ack());
}

ServerSession::Outcome ServerSession::Run() {
  try {
    Handshake();
  } catch (const ProtocolError& e) {
    Fail(e.code(), e.what(), true);
    return Outcome::kFailed;
  } catch (const wire::ChannelClosed&) {
    return Outcome::kPeerClosed;
  }

  const wire::DecodeContext ctx{key_.get()};
  ViterbiEngine engine(host_.model(), *key_, rng_, options_.engine,
                       options_.audit);
  ChannelExecutor executor(channel_, id_, ctx);
  const std::size_t d = host_.model().num_aps;

  try {
    while (true) {
      const wire::TrafficStats before = channel_.stats();
      Message m = wire::ReceiveMessage(channel_, ctx);
      if (std::holds_alternative<wire::Bye>(m.body)) return Outcome::kCompleted;
      if (const auto* err = std::get_if<wire::ErrorMsg>(&m.body)) {
        Fail(err->code, "client reported error: " + err->text, false);
        return Outcome::kFailed;
      }
      if (m.session != id_) {
        throw ProtocolError(wire::kErrUnknownSession,
                            "frame for unknown session");
      }
      auto* obs = std::get_if<wire::ObservationMsg>(&m.body);
      if (obs == nullptr) {
        throw ProtocolError(wire::kErrUnexpectedMessage,
                            "expected OBSERVATION or BYE");
      }
      if (obs->values.size() != d) {
        throw ProtocolError(wire::kErrCountMismatch,
                            "OBSERVATION carries " +
                                std::to_string(obs->values.size()) +
                                " readings, model has D=" + std::to_string(d));
      }
      const auto start = std::chrono::steady_clock::now();
      const Ciphertext position = engine.Step(*obs, executor);
      Send(wire::PositionMsg{obs->t, position});
      const auto stop = std::chrono::steady_clock::now();
      ++steps_;
      if (options_.cost_tap) options_.cost_tap(engine.costs());

      if (options_.sink) {
        const wire::TrafficStats& after = channel_.stats();
        StepRecord rec;
        rec.t = obs->t;
        rec.wall_ms =
            std::chrono::duration<double, std::milli>(stop - start).count();
        rec.bytes_up = after.bytes_received - before.bytes_received;
        rec.bytes_down = after.bytes_sent - before.bytes_sent;
        rec.round_trips = engine.last_step().round_trips;
        rec.cmp_ops = engine.last_step().compare_ops;
        options_.sink(rec);
      }
    }
  } catch (const wire::ChannelClosed&) {
    return Outcome::kPeerClosed;
  } catch (const ProtocolError& e) {
    Fail(e.code(), e.what(), !executor.peer_reported_error());
  } catch (const Error& e) {
    Fail(wire::kErrInternal, e.what(), true);
  }
  return Outcome::kFailed;
}

LocalizationServer::LocalizationServer(std::shared_ptr<const ModelHost> host,
                                       EngineOptions engine, StepSink sink)
    : host_(std::move(host)), engine_(engine), sink_(std::move(sink)) {}

LocalizationServer::~LocalizationServer() { Stop(); }

ServerSession::Outcome LocalizationServer::ServeChannel(
    wire::Channel& channel, crypto::RandomSource& rng) {
  SessionOptions opts;
  opts.engine = engine_;
  opts.sink = [this](const StepRecord& rec) {
    ++counters_.steps_completed;
    if (!sink_) return;
    std::lock_guard<std::mutex> lock(sink_mu_);
    sink_(rec);
  };
  ++counters_.sessions_started;
  ServerSession session(*host_, channel, rng, std::move(opts));
  spdlog::info("session {}: opened", ShortId(session.id()));
  const ServerSession::Outcome outcome = session.Run();
  if (outcome == ServerSession::Outcome::kFailed) ++counters_.sessions_failed;
  spdlog::info("session {}: closed after {} steps", ShortId(session.id()),
               session.steps());
  return outcome;
}

void LocalizationServer::Serve(wire::TcpListener& listener) {
  {
    std::lock_guard<std::mutex> lock(listener_mu_);
    listener_ = &listener;
  }
  std::vector<std::thread> workers;
  while (!stopping_) {
    std::unique_ptr<wire::TcpChannel> conn;
    try {
      conn = listener.Accept();
    } catch (const Error& e) {
      if (!stopping_) spdlog::error("accept failed: {}", e.what());
      break;
    }
    workers.emplace_back([this, c = std::move(conn)]() mutable {
      crypto::SystemRandom rng;
      try {
        ServeChannel(*c, rng);
      } catch (const std::exception& e) {
        spdlog::error("session aborted: {}", e.what());
      }
      c->Close();
    });
  }
  for (std::thread& w : workers) w.join();
  std::lock_guard<std::mutex> lock(listener_mu_);
  listener_ = nullptr;
}

void LocalizationServer::Stop() {
  stopping_ = true;
  std::lock_guard<std::mutex> lock(listener_mu_);
  if (listener_ != nullptr) listener_->Close();
}

}  // namespace privloc::server
