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

#include "model/temporal.hpp"

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"

namespace hivae {

std::vector<double> positional_encoding(std::size_t k, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw ConfigError("positional encoding needs an even, positive dimension");
  if (k == 0) throw ContractError("positional encoding steps start at 1");
  std::vector<double> pe(dim);
  const double kd = static_cast<double>(k);
  for (std::size_t d = 0; d < dim / 2; ++d) {
    const double angle = kd / std::pow(10000.0, static_cast<double>(2 * d) / static_cast<double>(dim));
    pe[2 * d] = std::sin(angle);
    pe[2 * d + 1] = std::cos(angle);
  }
  return pe;
}

PositionalTable::PositionalTable(std::size_t dim, std::size_t k_max) : dim_(dim) {
  if (dim == 0 || dim % 2 != 0) throw ConfigError("positional encoding needs an even, positive dimension");
  ensure(k_max);
}

void PositionalTable::ensure(std::size_t k) {
  if (k <= table_.rows()) return;
  std::size_t rows = std::max<std::size_t>(table_.rows(), 1);
  while (rows < k) rows *= 2;
  Matrix grown(rows, dim_);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto pe = positional_encoding(r + 1, dim_);
    std::copy(pe.begin(), pe.end(), grown.row(r).begin());
  }
  table_ = std::move(grown);
}

std::span<const double> PositionalTable::row(std::size_t k) const {
  if (k == 0 || k > table_.rows()) throw ContractError("positional table does not cover step " + std::to_string(k));
  return table_.row(k - 1);
}

std::vector<double> temporal_variable(const Matrix& popularity, PositionalTable& table, UserId user,
                                      std::size_t k) {
  if (user >= popularity.rows()) throw ContractError("temporal_variable: user out of range");
  if (popularity.cols() != table.dim()) throw ContractError("temporal_variable: dimension mismatch");
  table.ensure(k);
  const auto pe = table.row(k);
  const auto vp = popularity.row(user);
  std::vector<double> out(table.dim());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = vp[d] + pe[d];
  return out;
}

}  // namespace hivae
