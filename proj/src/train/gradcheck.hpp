// Copyright 2026 The hivae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "train/model.hpp"

namespace hivae {

enum class Objective { kVae, kDiffusion, kSocialReg, kFull };
std::string to_string(Objective o);

// Small random problem: 20 users, D = 8, 5 episodes, a fixed eps draw.
struct GradcheckProblem {
  std::unique_ptr<Model> model;
  std::vector<Episode> episodes;
  Matrix eps;
};

GradcheckProblem make_gradcheck_problem(const Config& base, std::uint64_t seed);

// Objective value with every parameter held constant.
double objective_value(const GradcheckProblem& p, Objective o);
// Analytic gradient of the objective for every parameter, keyed by name.
ParamStore objective_gradients(GradcheckProblem& p, Objective o);

struct TensorCheck {
  Objective objective;
  std::string tensor;
  std::size_t entries = 0;
  double max_rel_error = 0.0;
};

// Compares analytic and five-point finite-difference gradients for `tensor`
// ("all" for every parameter) under each objective. Each entry keeps the
// smallest error over steps h, h/10, h/100.
std::vector<TensorCheck> run_gradcheck(GradcheckProblem& p, const std::string& tensor,
                                       const std::vector<Objective>& objectives, double h = 1e-4);

}  // namespace hivae
