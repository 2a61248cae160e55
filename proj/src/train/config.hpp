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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace hivae {

enum class EncoderKind { kGcn, kMlp };
enum class DecoderKind { kInnerProduct, kMlp };
enum class Activation { kRelu, kTanh };
enum class FusionMode { kCoattention, kMeanpoolConcat, kSeparateAttentions };
// How a diffusion-phase batch weighs its log-likelihood against the
// regularizer. kSum: sum over the batch, regularizer spread over the epoch.
// kBatchMean: mean over the batch, regularizer applied in full every batch.
enum class BatchScaling { kSum, kBatchMean };

// Every tunable of model, training, and evaluation. Serialized as a flat
// JSON object; unknown keys are rejected.
struct Config {
  // social autoencoder
  EncoderKind encoder = EncoderKind::kGcn;
  DecoderKind decoder = DecoderKind::kInnerProduct;
  std::size_t embed_dim = 64;
  std::vector<std::size_t> hidden_dims = {64};
  Activation activation = Activation::kRelu;
  double beta = 10.0;
  // Above this many users the inner-product non-edge term is subsampled.
  std::size_t nonedge_exact_max_users = 20000;
  std::size_t nonedge_samples_per_user = 256;

  // diffusion block
  double lambda_s = 0.01;
  double lambda_r = 0.1;
  double lambda_p = 0.1;
  // Positive weight; nullopt means |negatives| / |targets| per episode.
  std::optional<double> eta;
  FusionMode fusion = FusionMode::kCoattention;
  bool tie_sender_receiver = false;
  double init_scale = 0.1;
  // 0 keeps the full complement as negatives.
  std::size_t negative_cap = 0;
  std::size_t max_episodes_per_cascade = 0;
  BatchScaling batch_scaling = BatchScaling::kSum;

  // optimization
  double lr = 1e-3;
  double pretrain_lr = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t user_batch = 256;
  std::size_t episode_batch = 64;
  std::size_t epochs = 50;
  std::size_t pretrain_epochs = 200;
  std::size_t patience = 5;
  bool static_pretrain = false;
  std::uint64_t seed = 0;

  // data and evaluation
  std::array<double, 3> split = {0.7, 0.1, 0.2};
  double val_seed_pct = 0.3;
  std::vector<double> seed_pcts = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::size_t> ks = {10, 50, 100};
  std::size_t top_k = 100;
  std::size_t threads = 1;

  nlohmann::json to_json() const;
  static Config from_json(const nlohmann::json& j);
  // Applies the keys present in `j` on top of this config.
  void merge(const nlohmann::json& j);
  // Throws ConfigError naming the offending key.
  void validate() const;
  // FNV-1a of the canonical JSON dump, as 16 hex digits.
  std::string hash() const;
};

std::string to_string(EncoderKind k);
std::string to_string(DecoderKind k);
std::string to_string(FusionMode m);
std::string to_string(BatchScaling s);

}  // namespace hivae
