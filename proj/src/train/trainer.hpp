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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascade/cascade_store.hpp"
#include "train/model.hpp"

namespace hivae {

struct EpochLog {
  std::size_t epoch = 0;
  // "pretrain", "network" or "diffusion"
  std::string phase;
  // Negated objective summed over the epoch's batches.
  double loss = 0.0;
  std::optional<double> val_map;
  double seconds = 0.0;
};

std::string format_log_header();
std::string format_log_row(const EpochLog& row);

struct TrainOptions {
  bool run_pretrain = true;
  // Called after every logged phase.
  std::function<void(const EpochLog&)> on_epoch;
  // Where the last good parameters go if training diverges.
  std::optional<std::filesystem::path> abort_dir;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_val_map = 0.0;
  bool stopped_early = false;
};

// Maximizes the VAE bound on the encoder/decoder with pretrain_lr.
std::vector<EpochLog> pretrain(Model& model, std::size_t epochs, const TrainOptions& opts = {});

// One pass over shuffled user batches updating only encoder/decoder weights.
double network_phase(Model& model, Rng& rng);
// One pass over shuffled episode batches updating only diffusion variables.
double diffusion_phase(Model& model, std::span<const Episode> episodes, Rng& rng);

// Pretraining followed by alternating phases with early stopping on
// validation MAP@10. The best parameters are left in the model.
TrainResult train(Model& model, const DatasetSplit& split, const TrainOptions& opts = {});


// recon - KL + sum of diffusion log-likelihoods - social_reg, with Z drawn
// from the fixed `eps` and the regularizer anchored at the encoder mean.
Var full_objective(const Model& model, Binder& bind, std::span<const Episode> episodes, const Matrix& eps);
double full_objective(const Model& model, std::span<const Episode> episodes, const Matrix& eps);

// Multiply-accumulate counts of the dominant terms of one epoch.
struct CostModel {
  double network = 0.0;
  double diffusion = 0.0;
  double total() const { return network + diffusion; }
};
CostModel per_epoch_cost_model(const SocialNetwork& net, std::size_t episodes, const Config& cfg);

}  // namespace hivae
