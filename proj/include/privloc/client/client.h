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

// The user agent: key holder, observation encryption and the client side
// of the wire protocol.

#ifndef PRIVLOC_CLIENT_CLIENT_H_
#define PRIVLOC_CLIENT_CLIENT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "privloc/crypto/private_key.h"
#include "privloc/crypto/random.h"
#include "privloc/error.h"
#include "privloc/stpc/key_holder.h"
#include "privloc/wire/channel.h"
#include "privloc/wire/messages.h"

namespace privloc::client {

// A failure that happened while localizing observation `step`.
class StepError : public ProtocolError {
 public:
  StepError(int code, std::int64_t step, const std::string& what)
      : ProtocolError(code, "step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

struct Position {
  std::int64_t t = 0;
  int state = 0;
  int room = 0;
  double x = 0.0;
  double y = 0.0;
};

struct ClientStepStats {
  std::int64_t t = 0;
  double wall_ms = 0.0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  std::uint64_t round_trips = 0;
};

// [r_d] and [r_d^2] for each reading; the square is taken on the encoded
// integer before encryption. Throws ModelError for readings outside
// [-110, 0] dBm.
wire::ObservationMsg EncryptObservation(const crypto::PublicKey& pk,
                                        std::uint32_t t,
                                        std::span<const double> rssi_dbm,
                                        crypto::RandomSource& rng);

class ClientSession {
 public:
  ClientSession(const crypto::PrivateKey& sk, wire::Channel& channel,
                crypto::RandomSource& rng);

  // Sends HELLO and waits for HELLO_ACK. An ERROR reply raises
  // ProtocolError with the server's code.
  void Handshake();

  // One observation in, one decrypted position out.
  Position Localize(std::span<const double> rssi_dbm);
  std::vector<Position> RunTrace(
      const std::vector<std::vector<double>>& trace);

  // Sends BYE.
  void Close();

  const wire::HelloAck& server_info() const { return ack_; }
  const std::vector<ClientStepStats>& step_stats() const { return stats_; }
  stpc::KeyHolder& key_holder() { return holder_; }

 private:
  void Send(wire::Body body);
  [[noreturn]] void Abort(int code, const std::string& text, bool notify);

  const crypto::PrivateKey& sk_;
  wire::Channel& channel_;
  crypto::RandomSource& rng_;
  stpc::KeyHolder holder_;
  wire::SessionId session_{};
  wire::HelloAck ack_;
  bool established_ = false;
  std::int64_t next_t_ = 0;
  std::vector<ClientStepStats> stats_;
};

}  // namespace privloc::client

#endif  // PRIVLOC_CLIENT_CLIENT_H_
