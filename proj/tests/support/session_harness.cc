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

#include "session_harness.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "privloc/crypto/fixed_point.h"
#include "privloc/params.h"
#include "seeded_random.h"

namespace privloc::testing {
namespace {

namespace fs = std::filesystem;

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool Contains(const Bytes& hay, const Bytes& needle) {
  return !needle.empty() &&
         std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

Bytes BigEndian64(std::int64_t v) {
  Bytes out(8);
  for (int i = 0; i < 8; ++i) {
    out[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (56 - 8 * i));
  }
  return out;
}

Bytes Ascii(const std::string& s) { return Bytes(s.begin(), s.end()); }

crypto::BigInt KeyField(const crypto::PrivateKey& sk, const std::string& name) {
  const std::string json = sk.ToJson();
  const auto at = json.find("\"" + name + "\":\"") + name.size() + 4;
  return crypto::FromHex(json.substr(at, json.find('"', at) - at));
}

}  // namespace

std::vector<std::vector<double>> ToDbm(const std::vector<hmm::Observation>& obs) {
  std::vector<std::vector<double>> out;
  for (const hmm::Observation& o : obs) {
    std::vector<double> row;
    for (auto v : o.rssi) row.push_back(static_cast<double>(v) / kMeasurementScale);
    out.push_back(std::move(row));
  }
  return out;
}

void RunLocalSession(const hmm::HmmModel& model,
                     const std::vector<std::vector<double>>& readings,
                     const crypto::PrivateKey& sk, std::uint64_t seed,
                     SessionTranscript& out) {
  const auto host = std::make_shared<server::ModelHost>(model);
  auto [server_end, client_end] = wire::MakePipe();
  client_end->set_recording(true);
  SeededRandom server_rng(seed);
  SeededRandom client_rng(seed ^ 0x9e3779b97f4a7c15ULL);

  std::thread server_thread([&, channel = server_end.get()] {
    server::SessionOptions opts;
    opts.audit = &out.audit;
    opts.sink = [&](const server::StepRecord& r) {
      out.cmp_ops += r.cmp_ops;
      out.steps.push_back(r);
    };
    opts.cost_tap = [&](const server::CostVector& c) { out.costs.push_back(c); };
    server::ServerSession s(*host, *channel, server_rng, opts);
    s.Run();
    channel->Close();
  });

  try {
    client::ClientSession c(sk, *client_end, client_rng);
    c.key_holder().set_observer(
        [&](stpc::ViewKind k, const crypto::BigInt&) { ++out.views[k]; });
    c.Handshake();
    out.readings = readings;
    out.positions = c.RunTrace(readings);
    c.Close();
  } catch (...) {
    client_end->Close();
    server_thread.join();
    throw;
  }
  server_thread.join();
  out.client_sent = client_end->sent_frames();
  out.server_sent = client_end->received_frames();
}

std::vector<std::string> ServerSourceFindings(const std::string& root_dir) {
  const fs::path root = root_dir;
  const std::vector<fs::path> server_side = {
      root / "include/privloc/server", root / "src/server",
      root / "include/privloc/stpc/protocol.h", root / "src/stpc/protocol.cc",
      root / "include/privloc/wire", root / "src/wire",
      root / "include/privloc/crypto/paillier.h", root / "src/crypto/paillier.cc"};
  const std::vector<std::string> forbidden = {"PrivateKey", "private_key.h", "key_holder.h",
                                              "Decrypt", "KeyHolder"};
  std::vector<std::string> findings;
  std::size_t scanned = 0;
  for (const fs::path& p : server_side) {
    std::vector<fs::path> files;
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) files.push_back(e.path());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      findings.push_back(p.string() + ": missing");
    }
    for (const fs::path& f : files) {
      const std::string text = ReadFile(f);
      ++scanned;
      for (const std::string& word : forbidden) {
        if (text.find(word) != std::string::npos) findings.push_back(f.string() + ": " + word);
      }
    }
  }
  if (scanned < 8) findings.push_back("only " + std::to_string(scanned) + " files scanned");
  return findings;
}

std::set<std::string> LinkClosure(const std::string& map_file, const std::string& target) {
  std::map<std::string, std::vector<std::string>> deps;
  std::istringstream map(ReadFile(map_file));
  std::string line;
  while (std::getline(map, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::istringstream rest(line.substr(colon + 1));
    std::string dep;
    auto& list = deps[line.substr(0, colon)];
    while (rest >> dep) list.push_back(dep);
  }
  std::set<std::string> closure;
  if (!deps.count(target)) return closure;
  std::vector<std::string> todo = {target};
  while (!todo.empty()) {
    const std::string t = todo.back();
    todo.pop_back();
    if (!closure.insert(t).second) continue;
    for (const std::string& d : deps[t]) todo.push_back(d);
  }
  return closure;
}

std::vector<std::string> TranscriptLeaks(const SessionTranscript& tr,
                                         const crypto::PrivateKey& sk) {
  std::vector<std::pair<std::string, Bytes>> needles;
  for (const auto& row : tr.readings) {
    for (double dbm : row) {
      const std::int64_t r = crypto::FpEncode(dbm, kMeasurementScale);
      for (std::int64_t v : {r, r * r}) {
        needles.emplace_back("reading int64 " + std::to_string(v), BigEndian64(v));
        // As the wire would carry an integer: u16 length, minimal magnitude.
        Bytes mag = crypto::ToBytes(abs(crypto::BigInt(v)));
        mag.insert(mag.begin(), {static_cast<std::uint8_t>(mag.size() >> 8),
                                 static_cast<std::uint8_t>(mag.size())});
        needles.emplace_back("reading magnitude " + std::to_string(v), mag);
        needles.emplace_back("reading decimal " + std::to_string(v), Ascii(std::to_string(v)));
      }
      std::ostringstream s;
      s << dbm;
      if (s.str().size() >= 4) needles.emplace_back("reading text " + s.str(), Ascii(s.str()));
    }
  }
  // Key confinement. phi(n) shares its leading bytes with n, so compare
  // the low 32 bytes of every secret.
  const crypto::BigInt p = KeyField(sk, "p"), q = KeyField(sk, "q");
  for (const auto& [name, value] :
       {std::pair{"p", p}, std::pair{"q", q}, std::pair{"phi", crypto::BigInt((p - 1) * (q - 1))}}) {
    const Bytes b = crypto::ToBytes(value);
    needles.emplace_back(std::string("key ") + name, Bytes(b.end() - 32, b.end()));
    needles.emplace_back(std::string("key hex ") + name, Ascii(crypto::ToHex(value).substr(0, 32)));
  }

  // Decoded positions are small integers and cannot be byte-scanned;
  // instead no client frame may carry anything but ciphertexts.
  const std::set<int> allowed = {static_cast<int>(wire::MessageType::kHello),
                                 static_cast<int>(wire::MessageType::kObservation),
                                 static_cast<int>(wire::MessageType::kRoundReply),
                                 static_cast<int>(wire::MessageType::kBye)};
  std::vector<std::string> leaks;
  for (const Bytes& frame : tr.client_sent) {
    if (frame.size() < wire::kHeaderSize) {
      leaks.push_back("short frame");
      continue;
    }
    const int type = frame[4];
    if (!allowed.count(type)) leaks.push_back("frame type " + std::to_string(type));
    if (!wire::DecodeFrame(frame, {&sk.public_key()}).ok()) leaks.push_back("undecodable frame");
    const Bytes payload(frame.begin() + wire::kHeaderSize, frame.end());
    for (const auto& [name, n] : needles) {
      if (n.size() >= 3 && Contains(payload, n)) {
        leaks.push_back(name + " in frame type " + std::to_string(type));
      }
    }
  }
  return leaks;
}

}  // namespace privloc::testing
