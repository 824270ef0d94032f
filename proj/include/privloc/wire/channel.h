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

#ifndef PRIVLOC_WIRE_CHANNEL_H_
#define PRIVLOC_WIRE_CHANNEL_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "privloc/error.h"
#include "privloc/wire/messages.h"

namespace privloc::wire {

// Raised when the peer went away.
class ChannelClosed : public Error {
 public:
  using Error::Error;
};

struct TrafficStats {
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_received = 0;
};

// A reliable, ordered stream of whole frames. One thread per endpoint.
class Channel {
 public:
  virtual ~Channel() = default;

  void SendFrame(std::span<const std::uint8_t> frame);
  std::vector<std::uint8_t> ReceiveFrame();
  virtual void Close() = 0;

  const TrafficStats& stats() const { return stats_; }

  // Every frame that crossed this endpoint, when recording is on.
  void set_recording(bool on) { recording_ = on; }
  const std::vector<std::vector<std::uint8_t>>& sent_frames() const { return sent_; }
  const std::vector<std::vector<std::uint8_t>>& received_frames() const { return received_; }

 protected:
  virtual void DoSend(std::span<const std::uint8_t> frame) = 0;
  virtual std::vector<std::uint8_t> DoReceive() = 0;

 private:
  TrafficStats stats_;
  bool recording_ = false;
  std::vector<std::vector<std::uint8_t>> sent_;
  std::vector<std::vector<std::uint8_t>> received_;
};

// In-process duplex pipe. Each frame becomes visible to the peer `latency`
// after it was sent.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> MakePipe(
    std::chrono::microseconds latency = std::chrono::microseconds(0));

class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  static std::unique_ptr<TcpChannel> Connect(const std::string& host,
                                             std::uint16_t port);
  void Close() override;

 protected:
  void DoSend(std::span<const std::uint8_t> frame) override;
  std::vector<std::uint8_t> DoReceive() override;

 private:
  int fd_;
};

class TcpListener {
 public:
  // Port 0 picks an ephemeral port.
  explicit TcpListener(std::uint16_t port, const std::string& bind_address = "0.0.0.0");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  // Blocks until a client connects; throws ChannelClosed after Close().
  std::unique_ptr<TcpChannel> Accept();
  void Close();

 private:
  int fd_;
  std::uint16_t port_;
};

void SendMessage(Channel& channel, const Message& message);

// Throws ProtocolError(kErrMalformedFrame) when the frame does not decode.
Message ReceiveMessage(Channel& channel, const DecodeContext& context = {});

}  // namespace privloc::wire

#endif  // PRIVLOC_WIRE_CHANNEL_H_
