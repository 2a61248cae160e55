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

#include "numeric/finite_diff.hpp"

#include <algorithm>
#include <cmath>

namespace hivae {

Matrix finite_diff_grad(const std::function<double(const ParamStore&)>& loss_fn, ParamStore& store,
                        const std::string& name, double h) {
  Matrix& x = store.value(name);
  Matrix grad(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    x.data()[i] = orig + h;
    const double fp = loss_fn(store);
    x.data()[i] = orig - h;
    const double fm = loss_fn(store);
    x.data()[i] = orig;
    grad.data()[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

Matrix finite_diff_grad5(const std::function<double(const ParamStore&)>& loss_fn, ParamStore& store,
                         const std::string& name, double h) {
  Matrix& x = store.value(name);
  Matrix grad(x.rows(), x.cols());
  auto at = [&](std::size_t i, double v) {
    x.data()[i] = v;
    return loss_fn(store);
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    const double d1 = at(i, orig + h) - at(i, orig - h);
    const double d2 = at(i, orig + 2.0 * h) - at(i, orig - 2.0 * h);
    x.data()[i] = orig;
    grad.data()[i] = (8.0 * d1 - d2) / (12.0 * h);
  }
  return grad;
}

double finite_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
}

double max_relative_error(const Matrix& analytic, const Matrix& numeric) {
  require_same_shape(analytic, numeric, "max_relative_error");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, relative_error(analytic.data()[i], numeric.data()[i]));
  return worst;
}

}  // namespace hivae
