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

// privloc-decode-plain: plaintext fixed-point Viterbi over a trace file.
// Emits one JSON line per step; with --plan and a trace that carries true
// cells, a final accuracy line.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "privloc/hmm/model_io.h"
#include "privloc/hmm/viterbi.h"
#include "privloc/sim/world.h"

int main(int argc, char** argv) {
  using namespace privloc;
  CLI::App app{"Plaintext Viterbi decoder"};
  std::string model_path, trace_path, plan_path;
  std::int64_t t_max = 0;
  app.add_option("--model", model_path)->required();
  app.add_option("--trace", trace_path)->required();
  app.add_option("--plan", plan_path, "Floor plan, for accuracy against true cells");
  app.add_option("--t-max", t_max, "Restart horizon; 0 disables")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    const hmm::HmmModel model = hmm::LoadModelFile(model_path);
    std::ifstream in(trace_path);
    if (!in) throw std::runtime_error("cannot read " + trace_path);
    std::stringstream ss;
    ss << in.rdbuf();
    const sim::GroundTruthTrace trace = sim::TraceFromJsonLines(ss.str());
    const hmm::DecodeResult r = hmm::ViterbiPlain(
        model, sim::TraceObservations(trace), {static_cast<std::size_t>(t_max)});
    for (std::size_t t = 0; t < r.states.size(); ++t) {
      nlohmann::ordered_json j;
      j["t"] = trace[t].t;
      j["state"] = r.states[t];
      j["room"] = model.states[static_cast<std::size_t>(r.states[t])].room;
      j["cost"] = std::to_string(r.min_costs[t]);
      j["unique"] = static_cast<bool>(r.unique_minimizer[t]);
      std::cout << j.dump() << "\n";
    }
    if (!plan_path.empty()) {
      std::ifstream pin(plan_path);
      std::stringstream ps;
      ps << pin.rdbuf();
      const sim::Accuracy a =
          sim::EvaluateAccuracy(r.states, trace, sim::PlanFromJson(ps.str()));
      nlohmann::ordered_json j;
      j["state_hit"] = a.state_hit;
      j["room_hit"] = a.room_hit;
      j["mean_cell_dist"] = a.mean_cell_dist;
      std::cout << nlohmann::ordered_json{{"accuracy", j}}.dump() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "privloc-decode-plain: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
