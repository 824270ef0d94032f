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

#include "privloc/hmm/model_io.h"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "privloc/error.h"

namespace privloc::hmm {
namespace {

using nlohmann::json;

std::int64_t ParseInteger(const json& value, const char* field) {
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (!value.is_string()) {
    throw ModelError(std::string(field) + " entries must be decimal strings");
  }
  const std::string& s = value.get_ref<const std::string&>();
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ModelError(std::string(field) + " entry '" + s +
                     "' is not a 64-bit decimal integer");
  }
  return out;
}

const json& Require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ModelError(std::string("model file is missing '") + key + "'");
  }
  return obj.at(key);
}

const json& RequireArray(const json& obj, const char* key) {
  const json& v = Require(obj, key);
  if (!v.is_array()) throw ModelError(std::string("'") + key + "' must be an array");
  return v;
}

}  // namespace

std::string ModelToJson(const HmmModel& model) {
  json j;
  j["version"] = kModelFormatVersion;
  j["N"] = model.size();
  j["D"] = model.num_aps;
  json states = json::array();
  for (const StateMeta& s : model.states) {
    states.push_back({{"id", s.id}, {"x", s.x}, {"y", s.y}, {"room", s.room}});
  }
  j["states"] = std::move(states);
  j["pred"] = model.pred;
  json a = json::array();
  for (const auto& row : model.transition_cost) {
    json r = json::array();
    for (Cost c : row) r.push_back(std::to_string(c));
    a.push_back(std::move(r));
  }
  j["A_cost"] = std::move(a);
  j["mu"] = model.mean_rssi;
  json pi = json::array();
  for (Cost c : model.initial_cost) pi.push_back(std::to_string(c));
  j["pi_cost"] = std::move(pi);
  j["scale_f"] = model.scale_f;
  return j.dump();
}

HmmModel ModelFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (Require(j, "version") != kModelFormatVersion) {
      throw ModelError("unsupported model format version");
    }
    HmmModel m;
    const auto n = Require(j, "N").get<std::size_t>();
    m.num_aps = Require(j, "D").get<std::size_t>();
    m.scale_f = Require(j, "scale_f").get<std::int64_t>();

    for (const json& s : RequireArray(j, "states")) {
      m.states.push_back({Require(s, "id").get<int>(),
                          Require(s, "x").get<double>(),
                          Require(s, "y").get<double>(),
                          Require(s, "room").get<int>()});
    }
    for (const json& row : RequireArray(j, "pred")) {
      m.pred.push_back(row.get<std::vector<int>>());
    }
    for (const json& row : RequireArray(j, "A_cost")) {
      if (!row.is_array()) throw ModelError("A_cost rows must be arrays");
      std::vector<Cost> r;
      for (const json& v : row) r.push_back(ParseInteger(v, "A_cost"));
      m.transition_cost.push_back(std::move(r));
    }
    for (const json& row : RequireArray(j, "mu")) {
      if (!row.is_array()) throw ModelError("mu rows must be arrays");
      std::vector<std::int64_t> r;
      for (const json& v : row) r.push_back(ParseInteger(v, "mu"));
      m.mean_rssi.push_back(std::move(r));
    }
    for (const json& v : RequireArray(j, "pi_cost")) {
      m.initial_cost.push_back(ParseInteger(v, "pi_cost"));
    }
    if (m.states.size() != n) {
      throw ModelError("N does not match the number of states");
    }
    ValidateModel(m);
    return m;
  } catch (const json::exception& e) {
    throw ModelError(std::string("model schema violation: ") + e.what());
  }
}

void SaveModel(const HmmModel& model, std::ostream& sink) {
  sink << ModelToJson(model) << '\n';
}

HmmModel LoadModel(std::istream& source) {
  std::string text((std::istreambuf_iterator<char>(source)),
                   std::istreambuf_iterator<char>());
  return ModelFromJson(text);
}

void SaveModelFile(const HmmModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot open " + path + " for writing");
  SaveModel(model, out);
}

HmmModel LoadModelFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path);
  return LoadModel(in);
}

}  // namespace privloc::hmm
