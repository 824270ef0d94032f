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

// privloc-client: localizes a recorded RSSI trace against a server.

#include <sys/stat.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "privloc/client/client.h"
#include "privloc/crypto/private_key.h"
#include "privloc/sim/world.h"
#include "privloc/wire/channel.h"

namespace {

std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

privloc::crypto::PrivateKey LoadOrCreateKey(const std::string& path, int bits) {
  if (std::filesystem::exists(path)) return privloc::crypto::PrivateKey::FromJson(Slurp(path));
  spdlog::info("generating a {}-bit key in {}", bits, path);
  privloc::crypto::SystemRandom rng;
  privloc::crypto::PrivateKey sk = privloc::crypto::GenerateKeyPair(bits, rng).second;
  {
    std::ofstream out(path);
    out << sk.ToJson() << "\n";
    if (!out) throw std::runtime_error("cannot write " + path);
  }
  chmod(path.c_str(), S_IRUSR | S_IWUSR);
  return sk;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace privloc;
  CLI::App app{"Privacy-preserving localization client"};
  std::string server, keyfile, trace_path, out_path, log_level = "info";
  int key_bits = 2048;
  app.add_option("--server", server, "HOST:PORT")->required();
  app.add_option("--keyfile", keyfile, "Private key JSON; created when absent")->required();
  app.add_option("--key-bits", key_bits, "Modulus size for a new key")
      ->check(CLI::IsMember({1024, 2048, 3072}));
  app.add_option("--trace", trace_path, "JSON lines {\"t\", \"rssi\": [...]}")->required();
  app.add_option("--out", out_path, "JSON lines {\"t\", \"state\", \"room\"}; - for stdout")
      ->required();
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  const auto colon = server.rfind(':');
  if (colon == std::string::npos) {
    spdlog::error("--server must be HOST:PORT");
    return 1;
  }
  const std::string host = server.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(server.substr(colon + 1));
  } catch (const std::exception&) {
    port = -1;
  }
  if (port <= 0 || port > 65535) {
    spdlog::error("bad port in {}", server);
    return 1;
  }

  sim::GroundTruthTrace trace;
  std::optional<crypto::PrivateKey> sk;
  try {
    trace = sim::TraceFromJsonLines(Slurp(trace_path));
    sk.emplace(LoadOrCreateKey(keyfile, key_bits));
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }

  std::ofstream file;
  if (out_path != "-") {
    file.open(out_path);
    if (!file) {
      spdlog::error("cannot write {}", out_path);
      return 1;
    }
  }
  std::ostream& out = out_path == "-" ? std::cout : file;

  try {
    auto channel = wire::TcpChannel::Connect(host, static_cast<std::uint16_t>(port));
    crypto::SystemRandom rng;
    client::ClientSession session(*sk, *channel, rng);
    session.Handshake();
    spdlog::info("connected to {}: N={} D={} N'max={}", server,
                 session.server_info().states.size(), session.server_info().num_aps,
                 session.server_info().max_pred);
    for (const sim::TraceStep& step : trace) {
      const client::Position p = session.Localize(step.rssi);
      nlohmann::ordered_json j;
      j["t"] = p.t;
      j["state"] = p.state;
      j["room"] = p.room;
      out << j.dump() << std::endl;
      const client::ClientStepStats& s = session.step_stats().back();
      spdlog::debug("t={} {:.0f} ms, {} B up, {} B down, {} round trips", s.t, s.wall_ms,
                    s.bytes_up, s.bytes_down, s.round_trips);
    }
    session.Close();
  } catch (const client::StepError& e) {
    spdlog::error("error code {}: {}", e.code(), e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 3;
  }
  return 0;
}
