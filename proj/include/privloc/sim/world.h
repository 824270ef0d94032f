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

// Synthetic floor plans, radio maps, movement traces and accuracy scoring.
//
// All radio constants are synthetic defaults for a log-distance path-loss
// model; nothing here is calibrated against a real building.

#ifndef PRIVLOC_SIM_WORLD_H_
#define PRIVLOC_SIM_WORLD_H_

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "privloc/hmm/model.h"

namespace privloc::sim {

struct WorldSpec {
  int rooms = 8;
  int cols = 16;
  int rows = 10;
  int num_aps = 20;
  std::uint64_t seed = 1;
  double cell_size = 2.0;  // meters
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Cells are numbered row-major: id = row * cols + col.
struct FloorPlan {
  int cols = 0;
  int rows = 0;
  int num_rooms = 0;
  double cell_size = 2.0;
  std::uint64_t seed = 0;
  std::vector<int> room;  // per cell
  // Unordered cell pairs (a < b) separated by a wall.
  std::set<std::pair<int, int>> walls;
  std::vector<Point> aps;

  int num_cells() const { return cols * rows; }
  Point Center(int cell) const;
  bool HasWall(int a, int b) const;
  // 4-neighbours not separated by a wall, in increasing id order.
  std::vector<int> Neighbors(int cell) const;
  // Wall edges crossed by the straight segment from a to b.
  int WallsCrossed(Point a, Point b) const;

  bool operator==(const FloorPlan&) const = default;
};

// Rooms are rectangular blocks of the grid. Every pair of adjacent rooms
// shares exactly one door. AP k is placed in room k mod rooms (rooms in a
// seed-dependent order) at a random point inside it. Throws
// SimulationError for degenerate specs.
FloorPlan GenerateWorld(const WorldSpec& spec);

struct RadioParams {
  double p0_dbm = -40.0;   // power at the reference distance
  double d0_m = 1.0;
  double gamma = 3.0;      // path-loss exponent
  double wall_db = 5.0;    // attenuation per wall crossed
  double sigma_db = 2.0;   // measurement noise
};

struct MovementParams {
  double p_stay = 0.4;
};

// Mean RSSI in dBm, cells x APs, clamped to [-110, 0].
std::vector<std::vector<double>> MeanRssiDbm(const FloorPlan& plan,
                                             const RadioParams& radio = {});

// Throws SimulationError when the model violates a cost bound.
hmm::HmmModel BuildModel(const FloorPlan& plan,
                         const MovementParams& movement = {},
                         const RadioParams& radio = {});

struct TraceStep {
  std::int64_t t = 0;
  int cell = 0;
  std::vector<double> rssi;
  bool operator==(const TraceStep&) const = default;
};

using GroundTruthTrace = std::vector<TraceStep>;

// Random walk from a uniform start cell, sampled from the model's
// transitions, with Gaussian noise around the mean RSSI.
GroundTruthTrace GenerateTrace(const FloorPlan& plan,
                               const hmm::HmmModel& model, std::size_t steps,
                               const RadioParams& radio, std::uint64_t seed);

std::vector<hmm::Observation> TraceObservations(const GroundTruthTrace& trace);
std::vector<std::vector<double>> TraceReadings(const GroundTruthTrace& trace);

struct Accuracy {
  double state_hit = 0.0;
  double room_hit = 0.0;
  // Mean Euclidean distance between decoded and true cell, in cells.
  double mean_cell_dist = 0.0;
};

// Decoded ids are cell ids. Throws SimulationError on a length mismatch.
Accuracy EvaluateAccuracy(const std::vector<int>& decoded,
                          const GroundTruthTrace& truth,
                          const FloorPlan& plan);

// A model with exactly n_pred predecessors per state on a circulant
// topology, random mean RSSI and a trace drawn from it. Used for scaling
// sweeps where N and N' must be set independently.
hmm::HmmModel SyntheticModel(std::size_t n, std::size_t n_pred, std::size_t d,
                             std::uint64_t seed);
std::vector<std::vector<double>> SyntheticReadings(const hmm::HmmModel& model,
                                                   std::size_t steps,
                                                   double sigma_db,
                                                   std::uint64_t seed);

std::string PlanToJson(const FloorPlan& plan);
FloorPlan PlanFromJson(const std::string& json);

// JSON lines {"t":..,"rssi":[..]} plus the true cell when known.
std::string TraceToJsonLines(const GroundTruthTrace& trace);
GroundTruthTrace TraceFromJsonLines(const std::string& text);

}  // namespace privloc::sim

#endif  // PRIVLOC_SIM_WORLD_H_
