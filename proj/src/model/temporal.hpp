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

#include <span>
#include <vector>

#include "graph/social_network.hpp"
#include "numeric/matrix.hpp"

namespace hivae {

// Sinusoidal embedding of activation step k >= 1 for even `dim`: slots
// (2d, 2d+1) hold sin and cos of k / 10000^(2d/dim), d = 0..dim/2-1.
std::vector<double> positional_encoding(std::size_t k, std::size_t dim);

// Rows for k = 1..k_max, grown on demand. Row contents depend only on
// (k, dim), so regrowing reproduces identical bits.
class PositionalTable {
 public:
  explicit PositionalTable(std::size_t dim, std::size_t k_max = 128);

  void ensure(std::size_t k);
  std::span<const double> row(std::size_t k) const;
  std::size_t dim() const { return dim_; }
  std::size_t k_max() const { return table_.rows(); }

 private:
  std::size_t dim_;
  Matrix table_;
};

// v^t = V_P[user] + PE(k)
std::vector<double> temporal_variable(const Matrix& popularity, PositionalTable& table, UserId user,
                                      std::size_t k);

}  // namespace hivae
