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

#include "privloc/sim/world.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "privloc/crypto/fixed_point.h"
#include "privloc/error.h"

namespace privloc::sim {
namespace {

using nlohmann::json;

std::pair<int, int> Edge(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// Block layout rx x ry = rooms, fitting the grid, with rooms as square as
// possible.
std::pair<int, int> RoomLayout(int rooms, int cols, int rows) {
  std::pair<int, int> best{0, 0};
  double best_score = std::numeric_limits<double>::infinity();
  for (int rx = 1; rx <= rooms; ++rx) {
    if (rooms % rx != 0) continue;
    const int ry = rooms / rx;
    if (rx > cols || ry > rows) continue;
    const double w = static_cast<double>(cols) / rx;
    const double h = static_cast<double>(rows) / ry;
    const double score = std::abs(std::log(w / h));
    if (score < best_score) {
      best_score = score;
      best = {rx, ry};
    }
  }
  if (best.first == 0) {
    throw SimulationError("cannot split a " + std::to_string(cols) + "x" +
                          std::to_string(rows) + " grid into " +
                          std::to_string(rooms) + " block rooms");
  }
  return best;
}

int Band(int index, int extent, int parts) {
  // Largest k with floor(k * extent / parts) <= index.
  int k = 0;
  while (k + 1 < parts && (k + 1) * extent / parts <= index) ++k;
  return k;
}

std::size_t Sample(const std::vector<double>& weights, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double x = u(gen) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (x < weights[i]) return i;
    x -= weights[i];
  }
  return weights.size() - 1;
}

struct Successors {
  std::vector<std::vector<int>> next;
  std::vector<std::vector<double>> prob;
};

Successors ModelSuccessors(const hmm::HmmModel& model) {
  Successors s;
  s.next.resize(model.size());
  s.prob.resize(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    for (std::size_t k = 0; k < model.pred[i].size(); ++k) {
      const auto j = static_cast<std::size_t>(model.pred[i][k]);
      s.next[j].push_back(static_cast<int>(i));
      s.prob[j].push_back(
          hmm::CostToProbability(model.transition_cost[i][k], model.scale_f * model.scale_f));
    }
  }
  return s;
}

double Clamp(double dbm) {
  return std::clamp(dbm, static_cast<double>(hmm::kMinRssiDbm),
                    static_cast<double>(hmm::kMaxRssiDbm));
}

}  // namespace

Point FloorPlan::Center(int cell) const {
  return {(cell % cols + 0.5) * cell_size, (cell / cols + 0.5) * cell_size};
}

bool FloorPlan::HasWall(int a, int b) const { return walls.count(Edge(a, b)) > 0; }

std::vector<int> FloorPlan::Neighbors(int cell) const {
  const int c = cell % cols;
  const int r = cell / cols;
  std::vector<int> out;
  if (r > 0) out.push_back(cell - cols);
  if (c > 0) out.push_back(cell - 1);
  if (c + 1 < cols) out.push_back(cell + 1);
  if (r + 1 < rows) out.push_back(cell + cols);
  std::erase_if(out, [&](int n) { return HasWall(cell, n); });
  return out;
}

int FloorPlan::WallsCrossed(Point a, Point b) const {
  auto cell_of = [&](double v, int extent) {
    return std::clamp(static_cast<int>(std::floor(v / cell_size)), 0, extent - 1);
  };
  int cx = cell_of(a.x, cols), cy = cell_of(a.y, rows);
  const int ex = cell_of(b.x, cols), ey = cell_of(b.y, rows);
  const double dx = b.x - a.x, dy = b.y - a.y;
  const int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  const double inf = std::numeric_limits<double>::infinity();
  const double tdx = dx != 0 ? cell_size / std::abs(dx) : inf;
  const double tdy = dy != 0 ? cell_size / std::abs(dy) : inf;
  double tx = dx != 0 ? ((sx > 0 ? (cx + 1) * cell_size : cx * cell_size) - a.x) / dx : inf;
  double ty = dy != 0 ? ((sy > 0 ? (cy + 1) * cell_size : cy * cell_size) - a.y) / dy : inf;
  int crossed = 0;
  // Each step moves to a 4-neighbour, so the loop runs at most
  // |ex - cx| + |ey - cy| times.
  while (cx != ex || cy != ey) {
    const int from = cy * cols + cx;
    if ((tx <= ty && cx != ex) || cy == ey) {
      cx += sx;
      tx += tdx;
    } else {
      cy += sy;
      ty += tdy;
    }
    if (HasWall(from, cy * cols + cx)) ++crossed;
  }
  return crossed;
}

FloorPlan GenerateWorld(const WorldSpec& spec) {
  if (spec.rooms < 1 || spec.cols < 1 || spec.rows < 1 || spec.num_aps < 1 ||
      !(spec.cell_size > 0)) {
    throw SimulationError("world needs >= 1 room, >= 1 cell and >= 1 AP");
  }
  const auto [rx, ry] = RoomLayout(spec.rooms, spec.cols, spec.rows);
  std::mt19937_64 gen(spec.seed);

  FloorPlan plan;
  plan.cols = spec.cols;
  plan.rows = spec.rows;
  plan.num_rooms = spec.rooms;
  plan.cell_size = spec.cell_size;
  plan.seed = spec.seed;
  plan.room.resize(static_cast<std::size_t>(spec.cols * spec.rows));
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      plan.room[static_cast<std::size_t>(r * spec.cols + c)] =
          Band(r, spec.rows, ry) * rx + Band(c, spec.cols, rx);
    }
  }

  // Candidate door edges per adjacent room pair.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> boundary;
  for (int cell = 0; cell < plan.num_cells(); ++cell) {
    const int c = cell % spec.cols;
    const int r = cell / spec.cols;
    for (int other : {c + 1 < spec.cols ? cell + 1 : -1,
                      r + 1 < spec.rows ? cell + spec.cols : -1}) {
      if (other < 0) continue;
      const int ra = plan.room[static_cast<std::size_t>(cell)];
      const int rb = plan.room[static_cast<std::size_t>(other)];
      if (ra == rb) continue;
      plan.walls.insert(Edge(cell, other));
      boundary[Edge(ra, rb)].push_back(Edge(cell, other));
    }
  }
  for (const auto& [rooms, edges] : boundary) {
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    plan.walls.erase(edges[pick(gen)]);
  }

  std::vector<std::vector<int>> cells_of(static_cast<std::size_t>(spec.rooms));
  for (int cell = 0; cell < plan.num_cells(); ++cell) {
    cells_of[static_cast<std::size_t>(plan.room[static_cast<std::size_t>(cell)])].push_back(cell);
  }
  std::vector<int> order(static_cast<std::size_t>(spec.rooms));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), gen);
  std::uniform_real_distribution<double> offset(0.0, spec.cell_size);
  for (int k = 0; k < spec.num_aps; ++k) {
    const auto& cells = cells_of[static_cast<std::size_t>(order[static_cast<std::size_t>(k % spec.rooms)])];
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    const int cell = cells[pick(gen)];
    const double x0 = (cell % spec.cols) * spec.cell_size;
    const double y0 = (cell / spec.cols) * spec.cell_size;
    const double ox = offset(gen);
    const double oy = offset(gen);
    plan.aps.push_back({x0 + ox, y0 + oy});
  }
  return plan;
}

std::vector<std::vector<double>> MeanRssiDbm(const FloorPlan& plan,
                                             const RadioParams& radio) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(plan.num_cells()));
  for (int cell = 0; cell < plan.num_cells(); ++cell) {
    const Point p = plan.Center(cell);
    auto& row = out[static_cast<std::size_t>(cell)];
    for (const Point& ap : plan.aps) {
      const double dist = std::max(std::hypot(p.x - ap.x, p.y - ap.y), radio.d0_m);
      const double loss = 10.0 * radio.gamma * std::log10(dist / radio.d0_m);
      row.push_back(Clamp(radio.p0_dbm - loss - radio.wall_db * plan.WallsCrossed(p, ap)));
    }
  }
  return out;
}

hmm::HmmModel BuildModel(const FloorPlan& plan, const MovementParams& movement,
                         const RadioParams& radio) {
  if (!(movement.p_stay >= 0.0 && movement.p_stay <= 1.0)) {
    throw SimulationError("p_stay must lie in [0, 1]");
  }
  const int n = plan.num_cells();
  hmm::HmmModel m;
  m.num_aps = plan.aps.size();

  // p(j -> i) for every source j.
  std::vector<std::map<int, double>> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const std::vector<int> nbrs = plan.Neighbors(j);
    auto& row = out[static_cast<std::size_t>(j)];
    if (nbrs.empty() || movement.p_stay >= 1.0) {
      row[j] = 1.0;
      continue;
    }
    if (movement.p_stay > 0.0) row[j] = movement.p_stay;
    for (int i : nbrs) row[i] = (1.0 - movement.p_stay) / static_cast<double>(nbrs.size());
  }
  std::vector<std::map<int, double>> in(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    for (const auto& [i, p] : out[static_cast<std::size_t>(j)]) in[static_cast<std::size_t>(i)][j] = p;
  }

  const auto means = MeanRssiDbm(plan, radio);
  for (int i = 0; i < n; ++i) {
    const Point c = plan.Center(i);
    m.states.push_back({i, c.x, c.y, plan.room[static_cast<std::size_t>(i)]});
    std::vector<int> pred;
    std::vector<hmm::Cost> cost;
    for (const auto& [j, p] : in[static_cast<std::size_t>(i)]) {
      pred.push_back(j);
      cost.push_back(hmm::NegLogCost(p));
    }
    if (pred.empty()) {
      throw SimulationError("cell " + std::to_string(i) + " is unreachable");
    }
    m.pred.push_back(std::move(pred));
    m.transition_cost.push_back(std::move(cost));
    std::vector<std::int64_t> mu;
    for (double v : means[static_cast<std::size_t>(i)]) mu.push_back(crypto::FpEncode(v, m.scale_f));
    m.mean_rssi.push_back(std::move(mu));
    m.initial_cost.push_back(hmm::NegLogCost(1.0 / n));
  }
  try {
    hmm::ValidateModel(m);
    hmm::MaxStepIncrement(m);
  } catch (const ModelError& e) {
    throw SimulationError(std::string("generated model is invalid: ") + e.what());
  }
  return m;
}

GroundTruthTrace GenerateTrace(const FloorPlan& plan, const hmm::HmmModel& model,
                               std::size_t steps, const RadioParams& radio,
                               std::uint64_t seed) {
  if (steps < 1) throw SimulationError("trace needs at least one step");
  if (model.size() != static_cast<std::size_t>(plan.num_cells())) {
    throw SimulationError("model does not belong to this plan");
  }
  std::mt19937_64 gen(seed);
  const Successors succ = ModelSuccessors(model);
  const auto means = MeanRssiDbm(plan, radio);
  std::normal_distribution<double> noise(0.0, radio.sigma_db);
  std::uniform_int_distribution<int> start(0, plan.num_cells() - 1);

  GroundTruthTrace trace;
  int cell = start(gen);
  for (std::size_t t = 0; t < steps; ++t) {
    if (t > 0) {
      const auto& next = succ.next[static_cast<std::size_t>(cell)];
      const int to = next[Sample(succ.prob[static_cast<std::size_t>(cell)], gen)];
      if (to != cell && plan.HasWall(cell, to)) {
        throw SimulationError("trace crossed a wall");
      }
      cell = to;
    }
    TraceStep step;
    step.t = static_cast<std::int64_t>(t);
    step.cell = cell;
    for (double mu : means[static_cast<std::size_t>(cell)]) {
      step.rssi.push_back(radio.sigma_db > 0 ? Clamp(mu + noise(gen)) : mu);
    }
    trace.push_back(std::move(step));
  }
  return trace;
}

std::vector<hmm::Observation> TraceObservations(const GroundTruthTrace& trace) {
  std::vector<hmm::Observation> out;
  out.reserve(trace.size());
  for (const TraceStep& s : trace) out.push_back(hmm::MakeObservation(s.t, s.rssi));
  return out;
}

std::vector<std::vector<double>> TraceReadings(const GroundTruthTrace& trace) {
  std::vector<std::vector<double>> out;
  out.reserve(trace.size());
  for (const TraceStep& s : trace) out.push_back(s.rssi);
  return out;
}

Accuracy EvaluateAccuracy(const std::vector<int>& decoded,
                          const GroundTruthTrace& truth, const FloorPlan& plan) {
  if (decoded.size() != truth.size()) {
    throw SimulationError("decoded length " + std::to_string(decoded.size()) +
                          " does not match trace length " +
                          std::to_string(truth.size()));
  }
  Accuracy acc;
  if (decoded.empty()) return acc;
  for (std::size_t t = 0; t < decoded.size(); ++t) {
    const int d = decoded[t];
    const int c = truth[t].cell;
    if (d < 0 || d >= plan.num_cells()) throw SimulationError("decoded id out of range");
    acc.state_hit += d == c;
    acc.room_hit += plan.room[static_cast<std::size_t>(d)] == plan.room[static_cast<std::size_t>(c)];
    acc.mean_cell_dist += std::hypot(d % plan.cols - c % plan.cols, d / plan.cols - c / plan.cols);
  }
  const double n = static_cast<double>(decoded.size());
  acc.state_hit /= n;
  acc.room_hit /= n;
  acc.mean_cell_dist /= n;
  return acc;
}

hmm::HmmModel SyntheticModel(std::size_t n, std::size_t n_pred, std::size_t d,
                             std::uint64_t seed) {
  if (n < 1 || n_pred < 1 || n_pred > n || d < 1) {
    throw SimulationError("synthetic model needs 1 <= N' <= N and D >= 1");
  }
  std::mt19937_64 gen(seed);
  std::vector<long> offsets = {0};
  for (long k = 1; offsets.size() < n_pred; ++k) {
    offsets.push_back(k);
    if (offsets.size() < n_pred) offsets.push_back(-k);
  }
  const double p_stay = n_pred == 1 ? 1.0 : 0.4;
  const double p_move = n_pred == 1 ? 0.0 : 0.6 / static_cast<double>(n_pred - 1);
  std::uniform_real_distribution<double> level(-95.0, -35.0);

  hmm::HmmModel m;
  m.num_aps = d;
  const long nn = static_cast<long>(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.states.push_back({static_cast<int>(i), static_cast<double>(i), 0.0,
                        static_cast<int>(i / 20)});
    std::map<int, hmm::Cost> pred;
    for (long o : offsets) {
      const int j = static_cast<int>(((static_cast<long>(i) + o) % nn + nn) % nn);
      pred[j] = hmm::NegLogCost(o == 0 ? p_stay : p_move);
    }
    std::vector<int> ids;
    std::vector<hmm::Cost> costs;
    for (const auto& [j, c] : pred) {
      ids.push_back(j);
      costs.push_back(c);
    }
    m.pred.push_back(std::move(ids));
    m.transition_cost.push_back(std::move(costs));
    std::vector<std::int64_t> mu;
    for (std::size_t k = 0; k < d; ++k) mu.push_back(crypto::FpEncode(level(gen), m.scale_f));
    m.mean_rssi.push_back(std::move(mu));
    m.initial_cost.push_back(hmm::NegLogCost(1.0 / static_cast<double>(n)));
  }
  hmm::ValidateModel(m);
  return m;
}

std::vector<std::vector<double>> SyntheticReadings(const hmm::HmmModel& model,
                                                   std::size_t steps,
                                                   double sigma_db,
                                                   std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const Successors succ = ModelSuccessors(model);
  std::normal_distribution<double> noise(0.0, sigma_db > 0 ? sigma_db : 1.0);
  std::uniform_int_distribution<std::size_t> start(0, model.size() - 1);
  std::size_t state = start(gen);
  std::vector<std::vector<double>> out;
  for (std::size_t t = 0; t < steps; ++t) {
    if (t > 0) state = static_cast<std::size_t>(succ.next[state][Sample(succ.prob[state], gen)]);
    std::vector<double> row;
    for (std::int64_t mu : model.mean_rssi[state]) {
      const double base = crypto::FpDecode(mu, model.scale_f);
      row.push_back(sigma_db > 0 ? Clamp(base + noise(gen)) : base);
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string PlanToJson(const FloorPlan& plan) {
  json j;
  j["cols"] = plan.cols;
  j["rows"] = plan.rows;
  j["num_rooms"] = plan.num_rooms;
  j["cell_size"] = plan.cell_size;
  j["seed"] = plan.seed;
  j["room"] = plan.room;
  json walls = json::array();
  for (const auto& [a, b] : plan.walls) walls.push_back({a, b});
  j["walls"] = walls;
  json aps = json::array();
  for (const Point& p : plan.aps) aps.push_back({p.x, p.y});
  j["aps"] = aps;
  return j.dump();
}

FloorPlan PlanFromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    FloorPlan plan;
    plan.cols = j.at("cols").get<int>();
    plan.rows = j.at("rows").get<int>();
    plan.num_rooms = j.at("num_rooms").get<int>();
    plan.cell_size = j.at("cell_size").get<double>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.room = j.at("room").get<std::vector<int>>();
    for (const auto& w : j.at("walls")) plan.walls.insert(Edge(w.at(0).get<int>(), w.at(1).get<int>()));
    for (const auto& p : j.at("aps")) plan.aps.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    if (plan.cols < 1 || plan.rows < 1 ||
        plan.room.size() != static_cast<std::size_t>(plan.cols * plan.rows)) {
      throw SimulationError("plan dimensions do not match its room map");
    }
    return plan;
  } catch (const json::exception& e) {
    throw SimulationError(std::string("bad plan file: ") + e.what());
  }
}

std::string TraceToJsonLines(const GroundTruthTrace& trace) {
  std::ostringstream out;
  for (const TraceStep& s : trace) {
    nlohmann::ordered_json j;
    j["t"] = s.t;
    j["rssi"] = s.rssi;
    j["cell"] = s.cell;
    out << j.dump() << '\n';
  }
  return out.str();
}

GroundTruthTrace TraceFromJsonLines(const std::string& text) {
  GroundTruthTrace trace;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      TraceStep s;
      s.t = j.at("t").get<std::int64_t>();
      s.rssi = j.at("rssi").get<std::vector<double>>();
      s.cell = j.value("cell", -1);
      trace.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw SimulationError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trace;
}

}  // namespace privloc::sim
