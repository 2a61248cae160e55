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
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "numeric/matrix.hpp"

namespace hivae {

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  // Adam moments and per-tensor step count; a frozen block keeps its own
  // bias correction untouched.
  Matrix m;
  Matrix v;
  std::uint64_t step = 0;
};

// Owns every trainable tensor. Iteration follows insertion order.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  Param& add(std::string name, Matrix init);
  bool contains(std::string_view name) const;
  Param& get(std::string_view name);
  const Param& get(std::string_view name) const;
  Matrix& value(std::string_view name) { return get(name).value; }
  const Matrix& value(std::string_view name) const { return get(name).value; }

  std::size_t size() const { return params_.size(); }
  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(std::string_view prefix) const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  // FNV-1a over the value bytes of the named tensors.
  std::uint64_t checksum(const std::vector<std::string>& names) const;

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One Adam step on the named tensors, descending their gradient (the
// trainer stores gradients of the negated objective). Throws NumericError
// naming the first non-finite gradient before touching any value.
void adam_step(ParamStore& store, const std::vector<std::string>& names, const AdamConfig& cfg);

}  // namespace hivae
