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

#include "numeric/param_store.hpp"

#include <cmath>
#include <cstring>

namespace hivae {

ParamStore::ParamStore(const ParamStore& other) : index_(other.index_) {
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) params_.push_back(std::make_unique<Param>(*p));
}

ParamStore& ParamStore::operator=(const ParamStore& other) {
  if (this != &other) {
    ParamStore copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Param& ParamStore::add(std::string name, Matrix init) {
  if (index_.contains(name)) throw ContractError("duplicate parameter name: " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->grad = Matrix(init.rows(), init.cols());
  p->m = Matrix(init.rows(), init.cols());
  p->v = Matrix(init.rows(), init.cols());
  p->value = std::move(init);
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

bool ParamStore::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

Param& ParamStore::get(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter: " + std::string(name));
  return *params_[it->second];
}

const Param& ParamStore::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter: " + std::string(name));
  return *params_[it->second];
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  for (const auto& p : params_) out.push_back(p->name);
  return out;
}

std::vector<std::string> ParamStore::names_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& p : params_)
    if (std::string_view(p->name).starts_with(prefix)) out.push_back(p->name);
  return out;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->grad.set_zero();
}

std::uint64_t ParamStore::checksum(const std::vector<std::string>& names) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* bytes, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& name : names) {
    const Param& p = get(name);
    mix(name.data(), name.size());
    mix(p.value.data(), p.value.size() * sizeof(double));
  }
  return h;
}

void adam_step(ParamStore& store, const std::vector<std::string>& names, const AdamConfig& cfg) {
  for (const auto& name : names) {
    if (!store.get(name).grad.all_finite()) {
      throw NumericError("non-finite gradient in tensor '" + name + "'");
    }
  }
  for (const auto& name : names) {
    Param& p = store.get(name);
    ++p.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step));
    double* w = p.value.data();
    const double* g = p.grad.data();
    double* m = p.m.data();
    double* v = p.v.data();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace hivae
