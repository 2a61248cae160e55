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

#include "train/model.hpp"

#include <fstream>

#include "common/errors.hpp"
#include "numeric/checkpoint.hpp"

#ifndef HIVAE_BUILD_ID
#define HIVAE_BUILD_ID "unknown"
#endif

namespace hivae {

const char* build_id() { return HIVAE_BUILD_ID; }

Dataset load_dataset(const std::filesystem::path& graph, const std::filesystem::path& cascades) {
  Dataset d;
  d.net = load_edge_file(graph, d.vocab);
  d.cascades = load_cascades(cascades, d.vocab, &d.report);
  return d;
}

namespace {

const Config& checked(const Config& cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

Model::Model(const Config& cfg, SocialNetwork net, Vocabulary vocab)
    : cfg_(checked(cfg)),
      net_(std::move(net)),
      vocab_(std::move(vocab)),
      view_(normalized_laplacian(net_)),
      vae_(cfg_, net_, view_),
      diffusion_(cfg_, net_.num_users()) {
  if (vocab_.size() != net_.num_users()) throw ContractError("vocabulary size does not match the network");
}

void Model::init_params() {
  store_ = ParamStore();
  Rng master(cfg_.seed);
  Rng enc_rng = master.substream(1);
  Rng diff_rng = master.substream(2);
  vae_.init_params(store_, enc_rng);
  diffusion_.init_params(store_, diff_rng);
}

std::vector<std::string> Model::network_param_names() const {
  std::vector<std::string> out;
  for (const auto& p : store_)
    if (GraphVae::owns(p->name)) out.push_back(p->name);
  return out;
}

Matrix Model::posterior_mean() const { return vae_.encode(store_).mu; }

nlohmann::json manifest_json(const Config& cfg) {
  return {{"version", kVersion},
          {"build_id", build_id()},
          {"config_hash", cfg.hash()},
          {"seed", cfg.seed},
          {"config", cfg.to_json()}};
}

void Model::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  save_tensors(store_, dir / "checkpoint.bin");
  vocab_.save(dir / "vocab.tsv");
  save_edge_file(net_, vocab_, dir / "edges.tsv");
  nlohmann::json m = manifest_json(cfg_);
  m["num_users"] = net_.num_users();
  m["tensors"] = nlohmann::json::array();
  for (const auto& p : store_)
    m["tensors"].push_back({{"name", p->name}, {"shape", {p->value.rows(), p->value.cols()}}});
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << m.dump(2) << '\n';
}

std::unique_ptr<Model> Model::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest.json: " + std::string(e.what()));
  }
  if (!m.contains("config")) throw IoError("manifest.json has no config");
  const Config cfg = Config::from_json(m["config"]);
  Vocabulary vocab = Vocabulary::load(dir / "vocab.tsv");
  const std::size_t n = vocab.size();
  SocialNetwork net = load_edge_file(dir / "edges.tsv", vocab, false);
  if (net.num_users() != n) throw IoError("edges.tsv does not match vocab.tsv");
  auto model = std::make_unique<Model>(cfg, std::move(net), std::move(vocab));
  model->store_ = load_tensors(dir / "checkpoint.bin");
  ParamStore expected;
  Rng rng(0);
  model->vae_.init_params(expected, rng);
  model->diffusion_.init_params(expected, rng);
  for (const auto& p : expected) {
    if (!model->store_.contains(p->name)) throw IoError("checkpoint lacks tensor '" + p->name + "'");
    const Matrix& got = model->store_.value(p->name);
    if (!got.same_shape(p->value)) throw IoError("checkpoint tensor '" + p->name + "' has shape " + shape_str(got));
  }
  return model;
}

}  // namespace hivae
