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

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "privloc/client/client.h"
#include "privloc/error.h"
#include "privloc/hmm/viterbi.h"
#include "privloc/server/engine.h"
#include "privloc/server/session.h"
#include "privloc/stpc/key_holder.h"
#include "seeded_random.h"

namespace privloc::server {
namespace {

using testing::SeededRandom;
using testing::TestKey1024;

const crypto::PrivateKey& Sk() { return TestKey1024(); }
const crypto::PublicKey& Pk() { return Sk().public_key(); }

std::int64_t Dec(const Ciphertext& c) { return crypto::ToInt64(Sk().Decrypt(c)); }

EncryptedObservation Encrypt(const hmm::Observation& obs, crypto::RandomSource& rng) {
  EncryptedObservation out;
  out.t = static_cast<std::uint32_t>(obs.t);
  for (std::size_t d = 0; d < obs.rssi.size(); ++d) {
    out.values.push_back(Pk().Encrypt(obs.rssi[d], rng));
    out.squares.push_back(Pk().Encrypt(obs.rssi_sq[d], rng));
  }
  return out;
}

hmm::HmmModel OneStateModel(std::size_t d) {
  hmm::HmmModel m;
  m.num_aps = d;
  m.states = {{0, 0.0, 0.0, 0}};
  m.pred = {{0}};
  m.transition_cost = {{0}};
  m.mean_rssi = {std::vector<std::int64_t>(d, -60 * kMeasurementScale)};
  m.initial_cost = {0};
  return m;
}

// Two states with a sticky transition matrix.
hmm::HmmModel TwoStateModel() {
  hmm::HmmModel m;
  m.num_aps = 2;
  m.states = {{0, 0.0, 0.0, 0}, {1, 4.0, 0.0, 1}};
  m.pred = {{0, 1}, {0, 1}};
  m.transition_cost = {{hmm::NegLogCost(0.8), hmm::NegLogCost(0.3)},
                       {hmm::NegLogCost(0.2), hmm::NegLogCost(0.7)}};
  m.mean_rssi = {{-50 * kMeasurementScale, -80 * kMeasurementScale},
                 {-75 * kMeasurementScale, -55 * kMeasurementScale}};
  m.initial_cost = {hmm::NegLogCost(0.5), hmm::NegLogCost(0.5)};
  return m;
}

struct Rig {
  explicit Rig(std::uint64_t seed) : server_rng(seed), client_rng(seed + 77),
                                     holder(Sk(), client_rng), executor(holder) {}
  SeededRandom server_rng;
  SeededRandom client_rng;
  stpc::KeyHolder holder;
  stpc::InProcessExecutor executor;
};

TEST(EmissionTest, SingleApExample) {
  hmm::HmmModel m = OneStateModel(1);
  SeededRandom rng(1);
  ViterbiEngine engine(m, Pk(), rng);
  const hmm::Observation obs = hmm::MakeObservation(0, std::vector<double>{-57.0});
  const std::vector<Ciphertext> e = engine.ComputeEmissionCosts(Encrypt(obs, rng));
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(Dec(e[0]), 90000000000);
}

TEST(EmissionTest, MatchingRowGivesZero) {
  hmm::HmmModel m = testing::RandomTestModel(5, 3, 4, 2);
  SeededRandom rng(2);
  ViterbiEngine engine(m, Pk(), rng);
  hmm::Observation obs;
  obs.rssi = m.mean_rssi[3];
  for (auto v : obs.rssi) obs.rssi_sq.push_back(v * v);
  const std::vector<Ciphertext> e = engine.ComputeEmissionCosts(Encrypt(obs, rng));
  EXPECT_EQ(Dec(e[3]), 0);
}

TEST(EmissionTest, MatchesPlaintextForAllStates) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    hmm::HmmModel m = testing::RandomTestModel(10, 3, 6, seed);
    SeededRandom rng(seed);
    ViterbiEngine engine(m, Pk(), rng);
    const hmm::Observation obs = testing::RandomTestObservations(6, 1, seed)[0];
    const std::vector<Ciphertext> e = engine.ComputeEmissionCosts(Encrypt(obs, rng));
    for (std::size_t i = 0; i < m.size(); ++i) {
      EXPECT_EQ(Dec(e[i]), hmm::EmissionCost(m, i, obs)) << i;
    }
  }
}

TEST(EmissionTest, CountMismatchIsAProtocolError) {
  hmm::HmmModel m = OneStateModel(3);
  SeededRandom rng(3);
  ViterbiEngine engine(m, Pk(), rng);
  EncryptedObservation obs;
  obs.values = {Pk().Encrypt(1, rng)};
  obs.squares = {Pk().Encrypt(1, rng)};
  try {
    engine.ComputeEmissionCosts(obs);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.code(), wire::kErrCountMismatch);
  }
}

TEST(EngineTest, SingleStateAlwaysZero) {
  hmm::HmmModel m = OneStateModel(2);
  Rig rig(4);
  ViterbiEngine engine(m, Pk(), rig.server_rng);
  const auto trace = testing::RandomTestObservations(2, 5, 4);
  for (const auto& obs : trace) {
    EXPECT_EQ(rig.holder.DecryptPosition(engine.Step(Encrypt(obs, rig.server_rng), rig.executor)), 0);
    EXPECT_EQ(engine.last_step().round_trips, 0u);
  }
}

void ExpectMatchesOracle(const hmm::HmmModel& m, const std::vector<hmm::Observation>& trace,
                         std::uint64_t seed, std::size_t horizon = 0) {
  Rig rig(seed);
  EngineOptions opts;
  if (horizon > 0) opts.horizon = static_cast<std::int64_t>(horizon);
  ViterbiEngine engine(m, Pk(), rig.server_rng, opts);
  const hmm::DecodeResult oracle = hmm::ViterbiPlain(m, trace, {horizon});
  std::uint64_t want_cmp = m.size() - 1;
  std::uint64_t pred_cmp = 0;
  std::size_t max_pred = 0;
  for (const auto& p : m.pred) {
    pred_cmp += p.size() - 1;
    max_pred = std::max(max_pred, p.size());
  }
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const Ciphertext pos = engine.Step(Encrypt(trace[t], rig.server_rng), rig.executor);
    const bool restart = t == 0 || (horizon > 0 && t % horizon == 0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      ASSERT_EQ(Dec(engine.costs().theta[i]), oracle.costs[t][i])
          << "seed " << seed << " t " << t << " i " << i;
    }
    const std::int64_t state = crypto::ToInt64(rig.holder.DecryptPosition(pos));
    ASSERT_EQ(oracle.costs[t][static_cast<std::size_t>(state)], oracle.min_costs[t]);
    if (oracle.unique_minimizer[t]) ASSERT_EQ(state, oracle.states[t]);
    EXPECT_EQ(engine.last_step().compare_ops, want_cmp + (restart ? 0 : pred_cmp));
    EXPECT_EQ(engine.last_step().round_trips,
              static_cast<std::uint64_t>(stpc::TournamentRounds(m.size()) +
                                         (restart ? 0 : stpc::TournamentRounds(max_pred))));
  }
}

TEST(EngineTest, TwoStateHandcrafted) {
  const hmm::HmmModel m = TwoStateModel();
  const std::vector<hmm::Observation> trace = {
      hmm::MakeObservation(0, std::vector<double>{-52.0, -78.5}),
      hmm::MakeObservation(1, std::vector<double>{-74.0, -57.25})};
  const hmm::DecodeResult oracle = hmm::ViterbiPlain(m, trace);
  EXPECT_EQ(oracle.states, (std::vector<int>{0, 1}));
  ExpectMatchesOracle(m, trace, 5);
}

TEST(EngineTest, RandomInstancesMatchOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const hmm::HmmModel m = testing::RandomTestModel(12, 4, 3, 1000 + seed);
    ExpectMatchesOracle(m, testing::RandomTestObservations(3, 6, 2000 + seed), seed);
  }
}

TEST(EngineTest, HorizonRestartsFromInitialCosts) {
  const hmm::HmmModel m = testing::RandomTestModel(6, 3, 2, 9);
  ExpectMatchesOracle(m, testing::RandomTestObservations(2, 7, 9), 9, 3);
}

TEST(EngineTest, OutOfOrderObservation) {
  const hmm::HmmModel m = TwoStateModel();
  Rig rig(6);
  ViterbiEngine engine(m, Pk(), rig.server_rng);
  hmm::Observation obs = hmm::MakeObservation(1, std::vector<double>{-50.0, -50.0});
  try {
    engine.Step(Encrypt(obs, rig.server_rng), rig.executor);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.code(), wire::kErrOutOfOrder);
  }
}

TEST(EngineTest, CostBoundProjection) {
  hmm::HmmModel m = OneStateModel(1);
  m.initial_cost = {std::int64_t{5} << 60};
  Rig rig(7);
  ViterbiEngine engine(m, Pk(), rig.server_rng);
  const auto trace = testing::RandomTestObservations(1, 2, 7);
  engine.Step(Encrypt(trace[0], rig.server_rng), rig.executor);
  try {
    engine.Step(Encrypt(trace[1], rig.server_rng), rig.executor);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.code(), wire::kErrCostOverflow);
  }
}

TEST(EngineTest, NoBlindingValueRepeats) {
  const hmm::HmmModel m = testing::RandomTestModel(12, 4, 3, 11);
  Rig rig(8);
  stpc::BlindingAudit audit;
  ViterbiEngine engine(m, Pk(), rig.server_rng, {}, &audit);
  for (const auto& obs : testing::RandomTestObservations(3, 4, 11)) {
    engine.Step(Encrypt(obs, rig.server_rng), rig.executor);
  }
  EXPECT_GT(audit.recorded(), 100u);
  EXPECT_EQ(audit.duplicates(), 0u);
}

// Session-level tests drive the server with raw wire messages.
class SessionTest : public ::testing::Test {
 protected:
  void Start(hmm::HmmModel model) {
    host_ = std::make_shared<ModelHost>(std::move(model));
    auto [a, b] = wire::MakePipe();
    server_end_ = std::move(a);
    client_end_ = std::move(b);
    thread_ = std::thread([this] {
      SessionOptions opts;
      opts.sink = [this](const StepRecord& r) { records_.push_back(r); };
      ServerSession s(*host_, *server_end_, rng_, opts);
      outcome_ = s.Run();
      server_end_->Close();
    });
  }
  void TearDown() override {
    if (thread_.joinable()) thread_.join();
  }
  wire::Message Receive() { return wire::ReceiveMessage(*client_end_); }
  void Send(wire::Body body, wire::SessionId id = {}) {
    wire::SendMessage(*client_end_, {id, std::move(body)});
  }

  SeededRandom rng_{42};
  std::shared_ptr<ModelHost> host_;
  std::unique_ptr<wire::Channel> server_end_;
  std::unique_ptr<wire::Channel> client_end_;
  std::thread thread_;
  ServerSession::Outcome outcome_{};
  std::vector<StepRecord> records_;
};

TEST_F(SessionTest, HandshakeAccepts1024BitKey) {
  Start(TwoStateModel());
  Send(wire::Hello{kProtocolVersion, Pk().n(), Pk().hs(), {}});
  wire::Message m = Receive();
  auto* ack = std::get_if<wire::HelloAck>(&m.body);
  ASSERT_NE(ack, nullptr);
  EXPECT_EQ(ack->states.size(), 2u);
  EXPECT_EQ(ack->max_pred, 2);
  EXPECT_EQ(ack->num_aps, 2);
  EXPECT_EQ(ack->states[1].room, 1);
  EXPECT_EQ(ack->model_digest, ModelDigest(TwoStateModel()));
  Send(wire::Bye{}, m.session);
  thread_.join();
  EXPECT_EQ(outcome_, ServerSession::Outcome::kCompleted);
  EXPECT_TRUE(records_.empty());
}

TEST_F(SessionTest, VersionMismatchGetsError1) {
  Start(TwoStateModel());
  Send(wire::Hello{2, Pk().n(), Pk().hs(), {}});
  wire::Message m = Receive();
  auto* err = std::get_if<wire::ErrorMsg>(&m.body);
  ASSERT_NE(err, nullptr);
  EXPECT_EQ(err->code, wire::kErrVersionMismatch);
  thread_.join();
  EXPECT_EQ(outcome_, ServerSession::Outcome::kFailed);
}

TEST_F(SessionTest, ParamMismatchAndWeakKey) {
  Start(TwoStateModel());
  FixedPointParams p;
  p.kappa = 20;
  Send(wire::Hello{kProtocolVersion, Pk().n(), Pk().hs(), p});
  wire::Message em = Receive();
  auto* err = std::get_if<wire::ErrorMsg>(&em.body);
  ASSERT_NE(err, nullptr);
  EXPECT_EQ(err->code, wire::kErrParamMismatch);
  thread_.join();

  Start(TwoStateModel());
  // 511-bit odd modulus: unsupported size.
  const crypto::BigInt small = crypto::PowerOfTwo(510) + 1;
  Send(wire::Hello{kProtocolVersion, small, 4, {}});
  wire::Message m = Receive();
  err = std::get_if<wire::ErrorMsg>(&m.body);
  ASSERT_NE(err, nullptr);
  EXPECT_EQ(err->code, wire::kErrWeakKey);
}

TEST_F(SessionTest, ObservationBeforeHelloIsUnexpected) {
  Start(TwoStateModel());
  Send(wire::Bye{});
  wire::Message em = Receive();
  auto* err = std::get_if<wire::ErrorMsg>(&em.body);
  ASSERT_NE(err, nullptr);
  EXPECT_EQ(err->code, wire::kErrUnexpectedMessage);
}

TEST_F(SessionTest, ReplyCountMismatchEndsSession) {
  Start(TwoStateModel());
  Send(wire::Hello{kProtocolVersion, Pk().n(), Pk().hs(), {}});
  const wire::SessionId sid = Receive().session;
  SeededRandom rng(9);
  const hmm::Observation obs = hmm::MakeObservation(0, std::vector<double>{-50.0, -60.0});
  Send(Encrypt(obs, rng), sid);
  wire::Message m = Receive();
  auto* req = std::get_if<wire::RoundRequest>(&m.body);
  ASSERT_NE(req, nullptr);
  ASSERT_EQ(req->pairs.size(), 1u);
  Send(wire::RoundReply{}, sid);
  wire::Message em = Receive();
  auto* err = std::get_if<wire::ErrorMsg>(&em.body);
  ASSERT_NE(err, nullptr);
  EXPECT_EQ(err->code, wire::kErrCountMismatch);
  thread_.join();
  EXPECT_EQ(outcome_, ServerSession::Outcome::kFailed);
}

TEST_F(SessionTest, WrongSessionIdIsRejected) {
  Start(TwoStateModel());
  Send(wire::Hello{kProtocolVersion, Pk().n(), Pk().hs(), {}});
  wire::SessionId sid = Receive().session;
  sid[0] ^= 1;
  SeededRandom rng(10);
  Send(Encrypt(hmm::MakeObservation(0, std::vector<double>{-50.0, -60.0}), rng), sid);
  wire::Message em = Receive();
  auto* err = std::get_if<wire::ErrorMsg>(&em.body);
  ASSERT_NE(err, nullptr);
  EXPECT_EQ(err->code, wire::kErrUnknownSession);
}

TEST_F(SessionTest, StepRecordsAreExact) {
  Start(TwoStateModel());
  SeededRandom rng(11);
  client::ClientSession client(Sk(), *client_end_, rng);
  client.Handshake();
  const auto positions = client.RunTrace({{-52.0, -78.5}, {-74.0, -57.25}, {-60.0, -60.0}});
  client.Close();
  thread_.join();
  EXPECT_EQ(outcome_, ServerSession::Outcome::kCompleted);
  ASSERT_EQ(records_.size(), 3u);
  ASSERT_EQ(client.step_stats().size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(records_[t].t, static_cast<std::int64_t>(t));
    EXPECT_EQ(records_[t].bytes_up, client.step_stats()[t].bytes_up);
    EXPECT_EQ(records_[t].bytes_down, client.step_stats()[t].bytes_down);
    EXPECT_EQ(records_[t].round_trips, client.step_stats()[t].round_trips);
    EXPECT_EQ(records_[t].round_trips, t == 0 ? 1u : 2u);
    EXPECT_EQ(records_[t].cmp_ops, t == 0 ? 1u : 3u);
  }
  EXPECT_EQ(positions[0].state, 0);
  EXPECT_EQ(positions[1].state, 1);
  const std::string line = records_[0].ToJson();
  EXPECT_EQ(line.rfind("{\"t\":0,\"wall_ms\":", 0), 0u) << line;
}

TEST(ModelHostTest, RejectsInvalidModel) {
  hmm::HmmModel m = TwoStateModel();
  m.pred[0].clear();
  m.transition_cost[0].clear();
  EXPECT_THROW(ModelHost{m}, ModelError);
}

}  // namespace
}  // namespace privloc::server
