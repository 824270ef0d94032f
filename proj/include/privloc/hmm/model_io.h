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

#ifndef PRIVLOC_HMM_MODEL_IO_H_
#define PRIVLOC_HMM_MODEL_IO_H_

#include <iosfwd>
#include <string>

#include "privloc/hmm/model.h"

namespace privloc::hmm {

inline constexpr int kModelFormatVersion = 1;

// Serialized form:
//   {"version":1, "N":..., "D":..., "states":[{"id","x","y","room"}...],
//    "pred":[[...]...], "A_cost":[["..."]...], "mu":[[...]...],
//    "pi_cost":["..."], "scale_f":100000}
// Cost fields are decimal strings so 64-bit values survive any JSON reader.
std::string ModelToJson(const HmmModel& model);
HmmModel ModelFromJson(const std::string& json);

void SaveModel(const HmmModel& model, std::ostream& sink);
HmmModel LoadModel(std::istream& source);

void SaveModelFile(const HmmModel& model, const std::string& path);
HmmModel LoadModelFile(const std::string& path);

}  // namespace privloc::hmm

#endif  // PRIVLOC_HMM_MODEL_IO_H_
