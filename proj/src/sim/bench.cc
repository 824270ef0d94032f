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

#include "privloc/sim/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "privloc/client/client.h"
#include "privloc/error.h"
#include "privloc/hmm/viterbi.h"
#include "privloc/server/session.h"
#include "privloc/wire/channel.h"

namespace privloc::sim {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

double NearestRank(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

const char* TopologyName(Topology t) {
  return t == Topology::kWorld ? "world" : "synthetic";
}

Topology ParseTopology(const std::string& s) {
  if (s == "world") return Topology::kWorld;
  if (s == "synthetic") return Topology::kSynthetic;
  throw SimulationError("unknown topology '" + s + "'");
}

ordered_json ConfigToJson(const BenchConfig& c) {
  ordered_json j;
  j["n"] = c.n;
  j["n_pred"] = c.n_pred;
  j["d"] = c.d;
  j["steps"] = c.steps;
  j["key_bits"] = c.key_bits;
  j["latency_ms"] = c.latency_ms;
  j["step_timeout_s"] = c.step_timeout_s;
  j["sigma_db"] = c.sigma_db;
  j["seed"] = c.seed;
  j["topology"] = TopologyName(c.topology);
  j["verify"] = c.verify;
  return j;
}

BenchConfig ConfigFromJson(const json& j, BenchConfig c = {}) {
  c.n = j.value("n", c.n);
  c.n_pred = j.value("n_pred", c.n_pred);
  c.d = j.value("d", c.d);
  c.steps = j.value("steps", c.steps);
  c.key_bits = j.value("key_bits", c.key_bits);
  c.latency_ms = j.value("latency_ms", c.latency_ms);
  c.step_timeout_s = j.value("step_timeout_s", c.step_timeout_s);
  c.sigma_db = j.value("sigma_db", c.sigma_db);
  c.seed = j.value("seed", c.seed);
  if (j.contains("topology")) c.topology = ParseTopology(j.at("topology").get<std::string>());
  c.verify = j.value("verify", c.verify);
  return c;
}

ordered_json SummaryToJson(const BenchSummary& s) {
  ordered_json j;
  j["mean_wall_ms"] = s.mean_wall_ms;
  j["steady_wall_ms"] = s.steady_wall_ms;
  j["p50_wall_ms"] = s.p50_wall_ms;
  j["p90_wall_ms"] = s.p90_wall_ms;
  j["max_wall_ms"] = s.max_wall_ms;
  j["mean_bytes"] = s.mean_bytes;
  j["max_bytes"] = s.max_bytes;
  j["mean_round_trips"] = s.mean_round_trips;
  j["timed_out"] = s.timed_out;
  return j;
}

bool Close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Grid with n cells, as square as the divisors allow.
FloorPlan WorldFor(const BenchConfig& c) {
  int rows = 1;
  for (int r = 1; r * r <= static_cast<int>(c.n); ++r) {
    if (c.n % static_cast<std::size_t>(r) == 0) rows = r;
  }
  WorldSpec spec;
  spec.rows = rows;
  spec.cols = static_cast<int>(c.n) / rows;
  spec.rooms = 8;
  spec.num_aps = static_cast<int>(c.d);
  spec.seed = c.seed;
  return GenerateWorld(spec);
}

}  // namespace

BenchSummary Summarize(const std::vector<BenchRow>& rows) {
  BenchSummary s;
  if (rows.empty()) return s;
  std::vector<double> wall;
  double steady = 0.0;
  std::size_t steady_n = 0;
  for (const BenchRow& r : rows) {
    wall.push_back(r.wall_ms);
    s.mean_wall_ms += r.wall_ms;
    s.max_wall_ms = std::max(s.max_wall_ms, r.wall_ms);
    const std::uint64_t bytes = r.bytes_up + r.bytes_down;
    s.mean_bytes += static_cast<double>(bytes);
    s.max_bytes = std::max(s.max_bytes, bytes);
    s.mean_round_trips += static_cast<double>(r.round_trips);
    s.timed_out += r.timed_out;
    if (r.t >= 1) {
      steady += r.wall_ms;
      ++steady_n;
    }
  }
  const double n = static_cast<double>(rows.size());
  s.mean_wall_ms /= n;
  s.mean_bytes /= n;
  s.mean_round_trips /= n;
  s.steady_wall_ms = steady_n > 0 ? steady / static_cast<double>(steady_n) : s.mean_wall_ms;
  s.p50_wall_ms = NearestRank(wall, 0.5);
  s.p90_wall_ms = NearestRank(wall, 0.9);
  return s;
}

BenchResult RunBench(const BenchConfig& config, const crypto::PrivateKey* key) {
  BenchResult result;
  result.config = config;

  std::optional<FloorPlan> plan;
  hmm::HmmModel model;
  GroundTruthTrace truth;
  std::vector<std::vector<double>> readings;
  if (config.topology == Topology::kWorld) {
    plan = WorldFor(config);
    model = BuildModel(*plan);
    RadioParams radio;
    radio.sigma_db = config.sigma_db;
    truth = GenerateTrace(*plan, model, config.steps, radio, config.seed * 7919 + 1);
    readings = TraceReadings(truth);
    result.config.n_pred = model.max_predecessors();
  } else {
    model = SyntheticModel(config.n, config.n_pred, config.d, config.seed);
    readings = SyntheticReadings(model, config.steps, config.sigma_db, config.seed * 7919 + 1);
  }

  crypto::SystemRandom rng;
  std::optional<crypto::PrivateKey> own_key;
  if (key == nullptr || key->public_key().key_bits() != config.key_bits) {
    own_key.emplace(crypto::GenerateKeyPair(config.key_bits, rng).second);
    key = &*own_key;
  }

  auto host = std::make_shared<server::ModelHost>(model);
  auto [server_end, client_end] = wire::MakePipe(
      std::chrono::microseconds(static_cast<std::int64_t>(config.latency_ms * 1000.0)));

  std::mutex mu;
  std::map<std::int64_t, server::StepRecord> server_rows;
  std::vector<server::CostVector> taps;
  std::thread server_thread([&, channel = server_end.get()] {
    crypto::SystemRandom server_rng;
    server::SessionOptions opts;
    opts.sink = [&](const server::StepRecord& r) {
      std::lock_guard<std::mutex> lock(mu);
      server_rows[r.t] = r;
    };
    if (config.verify) {
      opts.cost_tap = [&](const server::CostVector& c) {
        std::lock_guard<std::mutex> lock(mu);
        taps.push_back(c);
      };
    }
    server::ServerSession session(*host, *channel, server_rng, opts);
    session.Run();
    channel->Close();
  });

  std::vector<int> decoded;
  try {
    client::ClientSession client(*key, *client_end, rng);
    client.Handshake();
    for (const auto& r : readings) {
      const client::Position p = client.Localize(r);
      decoded.push_back(p.state);
    }
    client.Close();
    server_thread.join();
    const auto& stats = client.step_stats();
    for (std::size_t t = 0; t < stats.size(); ++t) {
      BenchRow row;
      row.t = stats[t].t;
      row.wall_ms = stats[t].wall_ms;
      row.bytes_up = stats[t].bytes_up;
      row.bytes_down = stats[t].bytes_down;
      row.round_trips = stats[t].round_trips;
      row.cmp_ops = server_rows.at(row.t).cmp_ops;
      row.state = decoded[t];
      row.timed_out = row.wall_ms > config.step_timeout_s * 1000.0;
      result.rows.push_back(row);
    }
  } catch (...) {
    client_end->Close();
    if (server_thread.joinable()) server_thread.join();
    throw;
  }
  result.summary = Summarize(result.rows);

  if (config.verify) {
    std::vector<hmm::Observation> obs;
    for (std::size_t t = 0; t < readings.size(); ++t) {
      obs.push_back(hmm::MakeObservation(static_cast<std::int64_t>(t), readings[t]));
    }
    const hmm::DecodeResult oracle = hmm::ViterbiPlain(model, obs);
    bool costs = taps.size() == obs.size();
    bool positions = decoded.size() == obs.size();
    for (std::size_t t = 0; costs && t < taps.size(); ++t) {
      for (std::size_t i = 0; costs && i < model.size(); ++i) {
        costs = key->Decrypt(taps[t].theta[i]) == oracle.costs[t][i];
      }
    }
    for (std::size_t t = 0; positions && t < decoded.size(); ++t) {
      const auto s = static_cast<std::size_t>(decoded[t]);
      positions = oracle.costs[t][s] == oracle.min_costs[t] &&
                  (!oracle.unique_minimizer[t] || decoded[t] == oracle.states[t]);
    }
    result.costs_match = costs;
    result.positions_match = positions;
  }
  if (plan) result.accuracy = EvaluateAccuracy(decoded, truth, *plan);
  return result;
}

std::vector<BenchConfig> SweepFromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    const BenchConfig base = ConfigFromJson(j.value("base", json::object()));
    const json sweep = j.value("sweep", json::object());
    auto axis = [&](const char* name, std::size_t dflt) {
      return sweep.contains(name) ? sweep.at(name).get<std::vector<std::size_t>>()
                                  : std::vector<std::size_t>{dflt};
    };
    std::vector<BenchConfig> out;
    for (std::size_t n : axis("n", base.n)) {
      for (std::size_t np : axis("n_pred", base.n_pred)) {
        for (std::size_t d : axis("d", base.d)) {
          BenchConfig c = base;
          c.n = n;
          c.n_pred = np;
          c.d = d;
          out.push_back(c);
        }
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw SimulationError(std::string("bad sweep file: ") + e.what());
  }
}

std::string ReportToJson(const std::vector<BenchResult>& results) {
  ordered_json runs = ordered_json::array();
  for (const BenchResult& r : results) {
    ordered_json run;
    run["config"] = ConfigToJson(r.config);
    ordered_json rows = ordered_json::array();
    for (const BenchRow& row : r.rows) {
      ordered_json o;
      o["t"] = row.t;
      o["wall_ms"] = row.wall_ms;
      o["bytes_up"] = row.bytes_up;
      o["bytes_down"] = row.bytes_down;
      o["round_trips"] = row.round_trips;
      o["cmp_ops"] = row.cmp_ops;
      o["state"] = row.state;
      o["timed_out"] = row.timed_out;
      rows.push_back(o);
    }
    run["rows"] = rows;
    run["summary"] = SummaryToJson(r.summary);
    if (r.costs_match) run["costs_match"] = *r.costs_match;
    if (r.positions_match) run["positions_match"] = *r.positions_match;
    if (r.accuracy) {
      run["accuracy"] = {{"state_hit", r.accuracy->state_hit},
                         {"room_hit", r.accuracy->room_hit},
                         {"mean_cell_dist", r.accuracy->mean_cell_dist},
                         {"note", "room_hit >= 0.9 is a synthetic acceptance proxy"}};
    }
    runs.push_back(run);
  }
  ordered_json doc;
  doc["runs"] = runs;
  return doc.dump(2);
}

std::vector<BenchResult> ReportFromJson(const std::string& text) {
  std::vector<BenchResult> out;
  try {
    const json doc = json::parse(text);
    for (const json& run : doc.at("runs")) {
      BenchResult r;
      r.config = ConfigFromJson(run.at("config"));
      for (const json& o : run.at("rows")) {
        BenchRow row;
        row.t = o.at("t").get<std::int64_t>();
        row.wall_ms = o.at("wall_ms").get<double>();
        row.bytes_up = o.at("bytes_up").get<std::uint64_t>();
        row.bytes_down = o.at("bytes_down").get<std::uint64_t>();
        row.round_trips = o.at("round_trips").get<std::uint64_t>();
        row.cmp_ops = o.at("cmp_ops").get<std::uint64_t>();
        row.state = o.at("state").get<int>();
        row.timed_out = o.at("timed_out").get<bool>();
        r.rows.push_back(row);
      }
      r.summary = Summarize(r.rows);
      const json& stored = run.at("summary");
      const ordered_json fresh = SummaryToJson(r.summary);
      for (const auto& [name, value] : fresh.items()) {
        if (!Close(stored.at(name).get<double>(), value.get<double>())) {
          throw SimulationError("report aggregate '" + name +
                                "' does not match its rows");
        }
      }
      if (run.contains("costs_match")) r.costs_match = run.at("costs_match").get<bool>();
      if (run.contains("positions_match")) r.positions_match = run.at("positions_match").get<bool>();
      if (run.contains("accuracy")) {
        const json& a = run.at("accuracy");
        r.accuracy = Accuracy{a.at("state_hit").get<double>(), a.at("room_hit").get<double>(),
                              a.at("mean_cell_dist").get<double>()};
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw SimulationError(std::string("bad report: ") + e.what());
  }
  return out;
}

std::string ReportToCsv(const std::vector<BenchResult>& results) {
  std::ostringstream out;
  out << "topology,n,n_pred,d,key_bits,latency_ms,t,wall_ms,bytes_up,"
         "bytes_down,round_trips,cmp_ops,state,timed_out\n";
  for (const BenchResult& r : results) {
    for (const BenchRow& row : r.rows) {
      out << TopologyName(r.config.topology) << ',' << r.config.n << ','
          << r.config.n_pred << ',' << r.config.d << ',' << r.config.key_bits
          << ',' << r.config.latency_ms << ',' << row.t << ',' << row.wall_ms
          << ',' << row.bytes_up << ',' << row.bytes_down << ','
          << row.round_trips << ',' << row.cmp_ops << ',' << row.state << ','
          << (row.timed_out ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

}  // namespace privloc::sim
