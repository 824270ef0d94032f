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

// End-to-end checks across both parties: privacy structure, transcript
// determinism and concurrent sessions.

#include <set>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "privloc/client/client.h"
#include "privloc/hmm/viterbi.h"
#include "privloc/server/session.h"
#include "session_harness.h"

namespace privloc {
namespace {

using testing::SessionTranscript;
using testing::TestKey1024;

const crypto::PrivateKey& Sk() { return TestKey1024(); }

void RunSession(const hmm::HmmModel& model, std::size_t steps, std::uint64_t seed,
                SessionTranscript& out) {
  testing::RunLocalSession(
      model, testing::ToDbm(testing::RandomTestObservations(model.num_aps, steps, seed)),
      Sk(), seed, out);
}

TEST(PrivacyTest, ServerHasNoDecryptionCapability) {
  for (const std::string& f : testing::ServerSourceFindings(PRIVLOC_SOURCE_DIR)) {
    ADD_FAILURE() << f;
  }
  const std::set<std::string> closure = testing::LinkClosure(PRIVLOC_LINK_MAP, "privloc_server");
  EXPECT_TRUE(closure.count("privloc_stpc"));
  EXPECT_FALSE(closure.count("privloc_keyholder"));
  EXPECT_FALSE(closure.count("privloc_stpc_keyholder"));
  EXPECT_FALSE(closure.count("privloc_client"));
}

TEST(PrivacyTest, NoPlaintextInServerBoundFrames) {
  const hmm::HmmModel model = testing::RandomTestModel(12, 4, 3, 5);
  SessionTranscript tr;
  RunSession(model, 6, 5, tr);
  ASSERT_EQ(tr.positions.size(), 6u);
  for (const std::string& leak : testing::TranscriptLeaks(tr, Sk())) ADD_FAILURE() << leak;
  std::size_t bytes = 0;
  for (const auto& f : tr.client_sent) bytes += f.size();
  EXPECT_GT(bytes, 10000u);
}

TEST(PrivacyTest, ScanDetectsPlantedPlaintext) {
  const hmm::HmmModel model = testing::RandomTestModel(4, 2, 2, 6);
  SessionTranscript tr;
  RunSession(model, 2, 6, tr);
  ASSERT_TRUE(testing::TranscriptLeaks(tr, Sk()).empty());
  // A frame carrying a reading as a plain integer must be flagged.
  const std::int64_t r = static_cast<std::int64_t>(tr.readings[0][0] * kMeasurementScale);
  testing::Bytes mag = crypto::ToBytes(abs(crypto::BigInt(r)));
  mag.insert(mag.begin(), {0, static_cast<std::uint8_t>(mag.size())});
  tr.client_sent.back().insert(tr.client_sent.back().end(), mag.begin(), mag.end());
  EXPECT_FALSE(testing::TranscriptLeaks(tr, Sk()).empty());
}

TEST(PrivacyTest, BlindingValuesAreSingleUse) {
  const hmm::HmmModel model = testing::RandomTestModel(12, 4, 3, 7);
  SessionTranscript tr;
  RunSession(model, 6, 7, tr);
  // s, rho_x and rho_y per pair at least.
  EXPECT_GE(tr.audit.recorded(), 3 * tr.cmp_ops);
  EXPECT_EQ(tr.audit.duplicates(), 0u);
}

TEST(PrivacyTest, ClientViewIsTokensAndPositionsOnly) {
  const hmm::HmmModel model = testing::RandomTestModel(12, 4, 3, 8);
  SessionTranscript tr;
  RunSession(model, 5, 8, tr);
  EXPECT_EQ(tr.views[stpc::ViewKind::kToken], tr.cmp_ops);
  EXPECT_EQ(tr.views[stpc::ViewKind::kPosition], 5u);
  EXPECT_EQ(tr.views[stpc::ViewKind::kMulOperand], 0u);
}

TEST(DeterminismTest, SeededReplayIsByteIdentical) {
  const hmm::HmmModel model = testing::RandomTestModel(10, 3, 3, 9);
  SessionTranscript a, b;
  RunSession(model, 4, 9, a);
  RunSession(model, 4, 9, b);
  EXPECT_EQ(a.client_sent, b.client_sent);
  EXPECT_EQ(a.server_sent, b.server_sent);
  SessionTranscript c;
  RunSession(model, 4, 10, c);
  EXPECT_NE(a.client_sent, c.client_sent);
}

TEST(ConcurrencyTest, TwoClientsOverTcp) {
  const hmm::HmmModel model = testing::RandomTestModel(12, 4, 3, 12);
  auto host = std::make_shared<const server::ModelHost>(model);
  server::LocalizationServer srv(host);
  wire::TcpListener listener(0, "127.0.0.1");
  std::thread serve([&] { srv.Serve(listener); });

  std::vector<std::vector<int>> got(2), want(2);
  std::vector<std::vector<bool>> unique(2);
  std::vector<std::thread> clients;
  for (int k = 0; k < 2; ++k) {
    clients.emplace_back([&, k] {
      const auto obs = testing::RandomTestObservations(3, 5, 100 + static_cast<std::uint64_t>(k));
      const hmm::DecodeResult oracle = hmm::ViterbiPlain(model, obs);
      want[static_cast<std::size_t>(k)] = oracle.states;
      unique[static_cast<std::size_t>(k)] = oracle.unique_minimizer;
      const auto readings = testing::ToDbm(obs);
      auto channel = wire::TcpChannel::Connect("127.0.0.1", listener.port());
      crypto::SystemRandom rng;
      client::ClientSession c(Sk(), *channel, rng);
      c.Handshake();
      for (const auto& p : c.RunTrace(readings)) got[static_cast<std::size_t>(k)].push_back(p.state);
      c.Close();
    });
  }
  for (auto& t : clients) t.join();
  srv.Stop();
  serve.join();
  for (std::size_t k = 0; k < 2; ++k) {
    ASSERT_EQ(got[k].size(), 5u);
    for (std::size_t t = 0; t < 5; ++t) {
      if (unique[k][t]) EXPECT_EQ(got[k][t], want[k][t]) << "client " << k << " t " << t;
    }
  }
  EXPECT_EQ(srv.counters().sessions_started, 2u);
  EXPECT_EQ(srv.counters().steps_completed, 10u);
  EXPECT_EQ(srv.counters().sessions_failed, 0u);
}

}  // namespace
}  // namespace privloc
