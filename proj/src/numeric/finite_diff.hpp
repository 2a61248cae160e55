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

#include <functional>
#include <string>

#include "numeric/matrix.hpp"
#include "numeric/param_store.hpp"

namespace hivae {

// Central differences (f(x+h) - f(x-h)) / 2h for every coordinate of the
// named tensor. The tensor is restored bit-exactly afterwards.
Matrix finite_diff_grad(const std::function<double(const ParamStore&)>& loss_fn, ParamStore& store,
                        const std::string& name, double h = 1e-5);

// Five-point central stencil
// (8(f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h, truncation error O(h^4).
Matrix finite_diff_grad5(const std::function<double(const ParamStore&)>& loss_fn, ParamStore& store,
                         const std::string& name, double h = 1e-4);

// Scalar overload, mostly for tests of the oracle itself.
double finite_diff(const std::function<double(double)>& f, double x, double h = 1e-5);

// |a - b| / max(1e-8, |a| + |b|)
double relative_error(double a, double b);
double max_relative_error(const Matrix& analytic, const Matrix& numeric);

}  // namespace hivae
