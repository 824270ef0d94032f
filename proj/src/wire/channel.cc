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

#include "privloc/wire/channel.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

namespace privloc::wire {
namespace {

using Clock = std::chrono::steady_clock;

struct PipeQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::pair<Clock::time_point, std::vector<std::uint8_t>>> frames;
  bool closed = false;
};

class PipeEnd final : public Channel {
 public:
  PipeEnd(std::shared_ptr<PipeQueue> in, std::shared_ptr<PipeQueue> out,
          std::chrono::microseconds latency)
      : in_(std::move(in)), out_(std::move(out)), latency_(latency) {}
  ~PipeEnd() override { Close(); }

  void Close() override {
    for (auto* q : {in_.get(), out_.get()}) {
      std::lock_guard lock(q->mu);
      q->closed = true;
      q->cv.notify_all();
    }
  }

 protected:
  void DoSend(std::span<const std::uint8_t> frame) override {
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw ChannelClosed("pipe closed");
    out_->frames.emplace_back(Clock::now() + latency_,
                              std::vector<std::uint8_t>(frame.begin(), frame.end()));
    out_->cv.notify_all();
  }

  std::vector<std::uint8_t> DoReceive() override {
    std::unique_lock lock(in_->mu);
    in_->cv.wait(lock, [&] { return !in_->frames.empty() || in_->closed; });
    if (in_->frames.empty()) throw ChannelClosed("pipe closed");
    const Clock::time_point due = in_->frames.front().first;
    if (Clock::now() < due) {
      lock.unlock();
      std::this_thread::sleep_until(due);
      lock.lock();
    }
    auto frame = std::move(in_->frames.front().second);
    in_->frames.pop_front();
    return frame;
  }

 private:
  std::shared_ptr<PipeQueue> in_;
  std::shared_ptr<PipeQueue> out_;
  std::chrono::microseconds latency_;
};

void WriteAll(int fd, std::span<const std::uint8_t> data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ChannelClosed(std::string("send failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

void ReadAll(int fd, std::span<std::uint8_t> data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::recv(fd, data.data() + done, data.size() - done, 0);
    if (n == 0) throw ChannelClosed("peer closed the connection");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ChannelClosed(std::string("recv failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace

void Channel::SendFrame(std::span<const std::uint8_t> frame) {
  DoSend(frame);
  stats_.bytes_sent += frame.size();
  ++stats_.frames_sent;
  if (recording_) sent_.emplace_back(frame.begin(), frame.end());
}

std::vector<std::uint8_t> Channel::ReceiveFrame() {
  std::vector<std::uint8_t> frame = DoReceive();
  stats_.bytes_received += frame.size();
  ++stats_.frames_received;
  if (recording_) received_.push_back(frame);
  return frame;
}

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> MakePipe(
    std::chrono::microseconds latency) {
  auto a_to_b = std::make_shared<PipeQueue>();
  auto b_to_a = std::make_shared<PipeQueue>();
  return {std::make_unique<PipeEnd>(b_to_a, a_to_b, latency),
          std::make_unique<PipeEnd>(a_to_b, b_to_a, latency)};
}

TcpChannel::TcpChannel(int fd) : fd_(fd) {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpChannel::~TcpChannel() { Close(); }

std::unique_ptr<TcpChannel> TcpChannel::Connect(const std::string& host,
                                                std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0) {
    throw ChannelClosed("cannot resolve " + host);
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw ChannelClosed("cannot connect to " + host + ":" + service);
  }
  return std::make_unique<TcpChannel>(fd);
}

void TcpChannel::Close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

void TcpChannel::DoSend(std::span<const std::uint8_t> frame) {
  if (fd_ < 0) throw ChannelClosed("channel closed");
  WriteAll(fd_, frame);
}

std::vector<std::uint8_t> TcpChannel::DoReceive() {
  if (fd_ < 0) throw ChannelClosed("channel closed");
  std::vector<std::uint8_t> frame(kHeaderSize);
  ReadAll(fd_, frame);
  const std::uint32_t length = PeekPayloadLength(frame);
  if (length > kMaxPayload) {
    throw ProtocolError(kErrMalformedFrame,
                        "announced payload of " + std::to_string(length) +
                            " bytes exceeds 64 MiB");
  }
  frame.resize(kHeaderSize + length);
  ReadAll(fd_, std::span(frame).subspan(kHeaderSize));
  return frame;
}

TcpListener::TcpListener(std::uint16_t port, const std::string& bind_address) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error("socket() failed");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw Error("invalid bind address " + bind_address);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(fd_, 64) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw Error("cannot bind port " + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { Close(); }

std::unique_ptr<TcpChannel> TcpListener::Accept() {
  while (true) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpChannel>(fd);
    if (errno == EINTR) continue;
    throw ChannelClosed("listener closed");
  }
}

void TcpListener::Close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

void SendMessage(Channel& channel, const Message& message) {
  channel.SendFrame(EncodeFrame(message));
}

Message ReceiveMessage(Channel& channel, const DecodeContext& context) {
  const std::vector<std::uint8_t> frame = channel.ReceiveFrame();
  DecodeOutcome outcome = DecodeFrame(frame, context);
  if (!outcome.ok()) {
    throw ProtocolError(kErrMalformedFrame,
                        std::string("undecodable frame (") +
                            DecodeErrorName(outcome.error) + "): " + outcome.detail);
  }
  return std::move(*outcome.message);
}

}  // namespace privloc::wire
