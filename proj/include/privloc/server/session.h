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

// Server-side session state machine and the multi-session run loop.

#ifndef PRIVLOC_SERVER_SESSION_H_
#define PRIVLOC_SERVER_SESSION_H_

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "privloc/crypto/random.h"
#include "privloc/hmm/model.h"
#include "privloc/server/engine.h"
#include "privloc/stpc/protocol.h"
#include "privloc/wire/channel.h"
#include "privloc/wire/messages.h"

namespace privloc::server {

// Per-step instrumentation, written as one JSON line per step.
struct StepRecord {
  std::int64_t t = 0;
  double wall_ms = 0.0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  std::uint64_t round_trips = 0;
  std::uint64_t cmp_ops = 0;

  std::string ToJson() const;
};

using StepSink = std::function<void(const StepRecord&)>;

// SHA-256 over the canonical JSON serialization of the model.
std::array<std::uint8_t, 32> ModelDigest(const hmm::HmmModel& model);

// The immutable model plus everything derived from it that sessions share.
class ModelHost {
 public:
  // Throws ModelError when the model does not validate.
  explicit ModelHost(hmm::HmmModel model);

  const hmm::HmmModel& model() const { return model_; }
  const wire::HelloAck& hello_ack() const { return ack_; }

 private:
  hmm::HmmModel model_;
  wire::HelloAck ack_;
};

// Maps library error codes onto the wire ERROR codes.
std::uint16_t WireErrorCode(int code);

// Drives ROUND_REQUEST/ROUND_REPLY and MUL_REQUEST/MUL_REPLY exchanges
// over a channel.
class ChannelExecutor final : public stpc::RoundExecutor {
 public:
  ChannelExecutor(wire::Channel& channel, const wire::SessionId& session,
                  const wire::DecodeContext& context)
      : channel_(channel), session_(session), context_(context) {}

  std::vector<stpc::SelectReply> SelectRound(
      const std::vector<stpc::BlindedPair>& pairs) override;
  std::vector<Ciphertext> MultiplyRound(
      const std::vector<stpc::MulRequest>& requests) override;

  std::uint64_t round_trips() const { return round_trips_; }
  // True when the last failure was an ERROR frame sent by the peer.
  bool peer_reported_error() const { return peer_error_; }

 private:
  wire::Message Receive();

  wire::Channel& channel_;
  wire::SessionId session_;
  wire::DecodeContext context_;
  std::uint64_t round_trips_ = 0;
  bool peer_error_ = false;
};

// Sees the encrypted cost vector after every step. Instrumentation only:
// it receives ciphertexts, never plaintext.
using CostTap = std::function<void(const CostVector&)>;

struct SessionOptions {
  EngineOptions engine;
  StepSink sink;
  CostTap cost_tap;
  stpc::BlindingAudit* audit = nullptr;
};

class ServerSession {
 public:
  enum class Outcome { kCompleted, kPeerClosed, kFailed };

  ServerSession(const ModelHost& host, wire::Channel& channel,
                crypto::RandomSource& rng, SessionOptions options = {});

  // Handshake, then one localization step per OBSERVATION until BYE or the
  // peer disconnects. Protocol violations end the session with an ERROR
  // frame.
  Outcome Run();

  const wire::SessionId& id() const { return id_; }
  std::int64_t steps() const { return steps_; }
  int error_code() const { return error_code_; }
  const std::string& error_text() const { return error_text_; }

 private:
  void Handshake();
  void Fail(int code, const std::string& text, bool notify_peer);
  void Send(wire::Body body);

  const ModelHost& host_;
  wire::Channel& channel_;
  crypto::RandomSource& rng_;
  SessionOptions options_;
  wire::SessionId id_{};
  std::unique_ptr<crypto::PublicKey> key_;
  std::int64_t steps_ = 0;
  int error_code_ = 0;
  std::string error_text_;
};

struct ServerCounters {
  std::atomic<std::uint64_t> sessions_started{0};
  std::atomic<std::uint64_t> sessions_failed{0};
  std::atomic<std::uint64_t> steps_completed{0};
};

class LocalizationServer {
 public:
  LocalizationServer(std::shared_ptr<const ModelHost> host,
                     EngineOptions engine = {}, StepSink sink = {});
  ~LocalizationServer();

  // Serves one connected channel on the calling thread.
  ServerSession::Outcome ServeChannel(wire::Channel& channel,
                                      crypto::RandomSource& rng);

  // Accepts connections until Stop(); one thread per session.
  void Serve(wire::TcpListener& listener);
  void Stop();

  const ServerCounters& counters() const { return counters_; }

 private:
  std::shared_ptr<const ModelHost> host_;
  EngineOptions engine_;
  StepSink sink_;
  std::mutex sink_mu_;
  ServerCounters counters_;
  std::atomic<bool> stopping_{false};
  wire::TcpListener* listener_ = nullptr;
  std::mutex listener_mu_;
};

}  // namespace privloc::server

#endif  // PRIVLOC_SERVER_SESSION_H_
