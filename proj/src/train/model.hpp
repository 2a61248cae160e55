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

#include <filesystem>
#include <memory>
#include <string>

#include "cascade/cascade_store.hpp"
#include "graph/social_network.hpp"
#include "model/diffusion.hpp"
#include "model/graph_vae.hpp"
#include "numeric/param_store.hpp"
#include "train/config.hpp"

namespace hivae {

inline constexpr const char* kVersion = "0.3.0";

// Build identifier baked in at compile time ("unknown" outside a checkout).
const char* build_id();

struct Dataset {
  Vocabulary vocab;
  SocialNetwork net;
  std::vector<Cascade> cascades;
  CascadeLoadReport report;
};

Dataset load_dataset(const std::filesystem::path& graph, const std::filesystem::path& cascades);

// Network, both model blocks and their parameters. The blocks keep
// references into the bundle, so it is neither copyable nor movable.
class Model {
 public:
  Model(const Config& cfg, SocialNetwork net, Vocabulary vocab);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  // Fresh parameters drawn from the config seed.
  void init_params();

  const Config& config() const { return cfg_; }
  const SocialNetwork& network() const { return net_; }
  const Vocabulary& vocab() const { return vocab_; }
  const GraphVae& vae() const { return vae_; }
  const DiffusionModel& diffusion() const { return diffusion_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  std::vector<std::string> network_param_names() const;
  std::vector<std::string> diffusion_param_names() const { return diffusion_.param_names(); }

  // E_q[Z] = mu for every user.
  Matrix posterior_mean() const;

  // Writes checkpoint.bin, manifest.json, vocab.tsv and edges.tsv.
  void save(const std::filesystem::path& dir) const;
  static std::unique_ptr<Model> load(const std::filesystem::path& dir);

 private:
  Config cfg_;
  SocialNetwork net_;
  Vocabulary vocab_;
  NormalizedView view_;
  GraphVae vae_;
  DiffusionModel diffusion_;
  ParamStore store_;
};

nlohmann::json manifest_json(const Config& cfg);

}  // namespace hivae
