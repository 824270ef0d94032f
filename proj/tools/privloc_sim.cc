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

// privloc-sim: synthetic floor plans, models and RSSI traces.
//
//   privloc-sim gen   --out plan.json
//   privloc-sim model --plan plan.json --out model.json
//   privloc-sim trace --plan plan.json --model model.json --steps 100 --out trace.jsonl

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "privloc/hmm/model_io.h"
#include "privloc/sim/world.h"

namespace {

std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

void AddRadio(CLI::App* cmd, privloc::sim::RadioParams& radio) {
  cmd->add_option("--p0", radio.p0_dbm, "Power at the reference distance, dBm");
  cmd->add_option("--gamma", radio.gamma, "Path-loss exponent");
  cmd->add_option("--wall-db", radio.wall_db, "Attenuation per wall, dB");
  cmd->add_option("--sigma", radio.sigma_db, "Measurement noise, dB");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace privloc;
  CLI::App app{"Synthetic indoor world simulator"};
  app.require_subcommand(1);

  sim::WorldSpec spec;
  std::string out = "-";
  CLI::App* gen = app.add_subcommand("gen", "Generate a floor plan");
  gen->add_option("--rooms", spec.rooms);
  gen->add_option("--cols", spec.cols);
  gen->add_option("--rows", spec.rows);
  gen->add_option("--aps", spec.num_aps);
  gen->add_option("--seed", spec.seed);
  gen->add_option("--cell-size", spec.cell_size, "meters");
  gen->add_option("--out", out);

  std::string plan_path, model_path;
  sim::RadioParams radio;
  sim::MovementParams movement;
  CLI::App* model = app.add_subcommand("model", "Build the HMM for a floor plan");
  model->add_option("--plan", plan_path)->required();
  model->add_option("--p-stay", movement.p_stay)->check(CLI::Range(0.0, 1.0));
  AddRadio(model, radio);
  model->add_option("--out", out);

  std::size_t steps = 100;
  std::uint64_t seed = 1;
  CLI::App* trace = app.add_subcommand("trace", "Random walk with noisy readings");
  trace->add_option("--plan", plan_path)->required();
  trace->add_option("--model", model_path)->required();
  trace->add_option("--steps", steps);
  trace->add_option("--seed", seed);
  AddRadio(trace, radio);
  trace->add_option("--out", out);
  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      Emit(out, sim::PlanToJson(sim::GenerateWorld(spec)) + "\n");
    } else if (model->parsed()) {
      const sim::FloorPlan plan = sim::PlanFromJson(Slurp(plan_path));
      Emit(out, hmm::ModelToJson(sim::BuildModel(plan, movement, radio)) + "\n");
    } else {
      const sim::FloorPlan plan = sim::PlanFromJson(Slurp(plan_path));
      const hmm::HmmModel m = hmm::LoadModelFile(model_path);
      Emit(out, sim::TraceToJsonLines(sim::GenerateTrace(plan, m, steps, radio, seed)));
    }
  } catch (const std::exception& e) {
    std::cerr << "privloc-sim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
