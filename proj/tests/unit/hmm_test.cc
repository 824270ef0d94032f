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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.h"
#include "privloc/error.h"
#include "privloc/hmm/model.h"
#include "privloc/hmm/model_io.h"
#include "privloc/hmm/viterbi.h"

namespace privloc::hmm {
namespace {

constexpr std::int64_t kF = kMeasurementScale;

// Single-AP, two-state model with hand-picked costs.
HmmModel TwoStateModel() {
  HmmModel m;
  m.num_aps = 1;
  m.states = {{0, 0.0, 0.0, 0}, {1, 2.0, 0.0, 1}};
  m.pred = {{0, 1}, {0, 1}};
  // P(0->0)=0.7, P(0->1)=0.3, P(1->0)=0.4, P(1->1)=0.6
  m.transition_cost = {{NegLogCost(0.7), NegLogCost(0.4)},
                       {NegLogCost(0.3), NegLogCost(0.6)}};
  m.mean_rssi = {{-60 * kF}, {-50 * kF}};
  m.initial_cost = {NegLogCost(0.5), NegLogCost(0.5)};
  return m;
}

TEST(NegLogCostTest, Examples) {
  EXPECT_EQ(NegLogCost(1.0, kCostScale), 0);
  EXPECT_EQ(::privloc::testing::MpfrNegLog("0.5", kCostScale), 6931471806);
  EXPECT_EQ(NegLogCost(0.5, kCostScale), 6931471806);
  EXPECT_THROW(NegLogCost(0.0), ModelError);
  EXPECT_THROW(NegLogCost(1.5), ModelError);
}

TEST(NegLogCostTest, AgreesWithMpfrOracle) {
  for (const char* p : {"0.4", "0.15", "0.2", "0.00625", "1e-9", "0.999"}) {
    EXPECT_EQ(NegLogCost(std::stod(p)), ::privloc::testing::MpfrNegLog(p, kCostScale)) << p;
  }
}

TEST(EmissionCostTest, SingleApExample) {
  HmmModel m = TwoStateModel();
  const double r[] = {-57.0};
  const Observation obs = MakeObservation(0, r);
  EXPECT_EQ(EmissionCost(m, 0, obs), 90000000000);  // 3^2 at scale f^2
}

TEST(EmissionCostTest, ZeroAtTheMean) {
  HmmModel m = TwoStateModel();
  const double r[] = {-50.0};
  EXPECT_EQ(EmissionCost(m, 1, MakeObservation(0, r)), 0);
}

TEST(EmissionCostTest, DirectAndExpandedFormsAgree) {
  const HmmModel m = ::privloc::testing::RandomTestModel(6, 3, 20, 99);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> dbm(-110.0, 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r(20);
    for (double& v : r) v = dbm(gen);
    const Observation obs = MakeObservation(trial, r);
    for (std::size_t i = 0; i < m.size(); ++i) {
      __int128 oracle = 0;
      for (std::size_t d = 0; d < 20; ++d) {
        const __int128 diff = obs.rssi[d] - m.mean_rssi[i][d];
        oracle += diff * diff;
      }
      ASSERT_EQ(EmissionCost(m, i, obs), static_cast<Cost>(oracle));
      ASSERT_EQ(EmissionCostExpanded(m, i, obs), EmissionCost(m, i, obs));
    }
  }
}

TEST(EmissionCostTest, RejectsDimensionMismatch) {
  HmmModel m = TwoStateModel();
  const double r[] = {-57.0, -60.0};
  EXPECT_THROW(EmissionCost(m, 0, MakeObservation(0, r)), ModelError);
}

TEST(ObservationTest, SquaresAreExact) {
  const double r[] = {-57.3, 0.0};
  const Observation obs = MakeObservation(3, r);
  EXPECT_EQ(obs.rssi[0], -5730000);
  EXPECT_EQ(obs.rssi_sq[0], 32832900000000);
  EXPECT_EQ(obs.rssi[1], 0);
  EXPECT_EQ(obs.rssi_sq[1], 0);
  const double bad[] = {-111.0};
  EXPECT_THROW(MakeObservation(0, bad), ModelError);
}

TEST(ViterbiTest, SingleStateAlwaysDecodesZero) {
  HmmModel m;
  m.num_aps = 1;
  m.states = {{0, 0, 0, 0}};
  m.pred = {{0}};
  m.transition_cost = {{0}};
  m.mean_rssi = {{-40 * kF}};
  m.initial_cost = {0};
  ValidateModel(m);
  const auto obs = ::privloc::testing::RandomTestObservations(1, 5, 3);
  const DecodeResult r = ViterbiPlain(m, obs);
  for (int s : r.states) EXPECT_EQ(s, 0);
}

TEST(ViterbiTest, TwoStatesMatchEnumerationOfAllPaths) {
  const HmmModel m = TwoStateModel();
  const double r0[] = {-58.0}, r1[] = {-51.5};
  const std::vector<Observation> obs = {MakeObservation(0, r0), MakeObservation(1, r1)};
  // All four paths, by hand.
  Cost best = std::numeric_limits<Cost>::max();
  int best_end = -1;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const std::size_t k = static_cast<std::size_t>(a);  // pred lists are {0, 1}
      const Cost c = m.initial_cost[a] + EmissionCost(m, a, obs[0]) +
                     m.transition_cost[b][k] + EmissionCost(m, b, obs[1]);
      if (c < best) {
        best = c;
        best_end = b;
      }
    }
  }
  const DecodeResult r = ViterbiPlain(m, obs);
  EXPECT_EQ(r.min_costs[1], best);
  EXPECT_EQ(r.states[1], best_end);
}

TEST(ViterbiTest, OptimalAgainstBruteForce) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const std::size_t n = 2 + seed % 11;
    const HmmModel m = ::privloc::testing::RandomTestModel(n, 4, 3, seed);
    const auto obs = ::privloc::testing::RandomTestObservations(3, 6, seed + 100);
    const DecodeResult r = ViterbiPlain(m, obs);
    EXPECT_EQ(r.min_costs, ::privloc::testing::BruteForceMinCosts(m, obs)) << seed;
  }
}

TEST(ViterbiTest, TwelveStateInstance) {
  const HmmModel m = ::privloc::testing::RandomTestModel(12, 4, 3, 4242);
  const auto obs = ::privloc::testing::RandomTestObservations(3, 6, 4243);
  EXPECT_EQ(ViterbiPlain(m, obs).min_costs,
            ::privloc::testing::BruteForceMinCosts(m, obs));
}

TEST(ViterbiTest, MinimalCostsAreMonotone) {
  const HmmModel m = ::privloc::testing::RandomTestModel(10, 4, 5, 7);
  const auto obs = ::privloc::testing::RandomTestObservations(5, 30, 8);
  const DecodeResult r = ViterbiPlain(m, obs);
  for (std::size_t t = 1; t < r.min_costs.size(); ++t) {
    EXPECT_GE(r.min_costs[t], r.min_costs[t - 1]);
  }
}

TEST(ViterbiTest, MarkovLocality) {
  const HmmModel m = ::privloc::testing::RandomTestModel(10, 4, 3, 17);
  auto obs = ::privloc::testing::RandomTestObservations(3, 8, 18);
  const DecodeResult before = ViterbiPlain(m, obs);
  const double changed[] = {-33.3, -99.9, -70.0};
  obs[5] = MakeObservation(5, changed);
  const DecodeResult after = ViterbiPlain(m, obs);
  for (std::size_t t = 0; t < 5; ++t) EXPECT_EQ(after.costs[t], before.costs[t]);
}

TEST(ViterbiTest, TiesGoToLowestStateId) {
  HmmModel m = TwoStateModel();
  m.mean_rssi = {{-55 * kF}, {-55 * kF}};
  const double r[] = {-55.0};
  const DecodeResult res = ViterbiPlain(m, {MakeObservation(0, r)});
  EXPECT_EQ(res.states[0], 0);
  EXPECT_FALSE(res.unique_minimizer[0]);
}

TEST(ViterbiTest, BacktrackedPathIsConsistent) {
  const HmmModel m = ::privloc::testing::RandomTestModel(8, 4, 3, 55);
  const auto obs = ::privloc::testing::RandomTestObservations(3, 6, 56);
  const DecodeResult r = ViterbiPlain(m, obs);
  ASSERT_EQ(r.path.size(), obs.size());
  EXPECT_EQ(r.path.back(), r.states.back());
  // Recompute the path cost; it must equal the terminal minimum.
  const auto k0 = static_cast<std::size_t>(r.path[0]);
  Cost c = m.initial_cost[k0] + EmissionCost(m, k0, obs[0]);
  for (std::size_t t = 1; t < obs.size(); ++t) {
    const auto i = static_cast<std::size_t>(r.path[t]);
    const auto& pred = m.pred[i];
    const auto it = std::find(pred.begin(), pred.end(), r.path[t - 1]);
    ASSERT_NE(it, pred.end());
    c += m.transition_cost[i][static_cast<std::size_t>(it - pred.begin())] +
         EmissionCost(m, i, obs[t]);
  }
  EXPECT_EQ(c, r.min_costs.back());
}

TEST(ViterbiTest, HorizonRestartsFromInitialCosts) {
  const HmmModel m = ::privloc::testing::RandomTestModel(6, 3, 2, 61);
  const auto obs = ::privloc::testing::RandomTestObservations(2, 7, 62);
  const DecodeResult full = ViterbiPlain(m, obs, {.horizon = 4});
  const std::vector<Observation> tail(obs.begin() + 4, obs.end());
  const DecodeResult restarted = ViterbiPlain(m, tail);
  for (std::size_t t = 0; t < tail.size(); ++t) {
    EXPECT_EQ(full.costs[t + 4], restarted.costs[t]);
  }
}

TEST(ViterbiTest, RejectsEmptyObservationList) {
  EXPECT_THROW(ViterbiPlain(TwoStateModel(), {}), ModelError);
}

TEST(ModelIoTest, RoundTrip) {
  const HmmModel m = ::privloc::testing::RandomTestModel(9, 4, 4, 71);
  std::stringstream ss;
  SaveModel(m, ss);
  EXPECT_EQ(LoadModel(ss), m);
}

TEST(ModelIoTest, CostsAreDecimalStrings) {
  const std::string json = ModelToJson(TwoStateModel());
  EXPECT_NE(json.find("\"A_cost\":[[\""), std::string::npos);
  EXPECT_NE(json.find("\"pi_cost\":[\""), std::string::npos);
}

TEST(ModelIoTest, RejectsEmptyPredecessorList) {
  HmmModel m = TwoStateModel();
  m.pred[1].clear();
  m.transition_cost[1].clear();
  EXPECT_THROW(ModelFromJson(ModelToJson(m)), ModelError);
}

TEST(ModelIoTest, RejectsUnnormalizedTransitions) {
  HmmModel m = TwoStateModel();
  // Outgoing probabilities of state 0 become 0.5 + 0.3 = 0.8.
  m.transition_cost[0][0] = NegLogCost(0.5);
  EXPECT_THROW(ModelFromJson(ModelToJson(m)), ModelError);
}

TEST(ModelIoTest, RejectsSchemaViolations) {
  EXPECT_THROW(ModelFromJson("{}"), ModelError);
  EXPECT_THROW(ModelFromJson("[1,2"), ModelError);
  std::string json = ModelToJson(TwoStateModel());
  json.replace(json.find("\"version\":1"), 11, "\"version\":7");
  EXPECT_THROW(ModelFromJson(json), ModelError);
  HmmModel m = TwoStateModel();
  m.mean_rssi[0][0] = -120 * kF;
  EXPECT_THROW(ModelFromJson(ModelToJson(m)), ModelError);
}

}  // namespace
}  // namespace privloc::hmm
