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

#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "cascade/cascade_store.hpp"
#include "eval/metrics.hpp"
#include "model/temporal.hpp"
#include "numeric/matrix.hpp"
#include "numeric/param_store.hpp"
#include "numeric/rng.hpp"
#include "numeric/tape.hpp"
#include "train/config.hpp"

namespace hivae {

struct FusionOutput {
  // One entry per seed; empty for meanpool fusion. For separate attentions
  // these are the temporal-side weights.
  std::vector<double> alpha;
  std::vector<double> scores;
  std::vector<double> h;
};

// G_k = tanh(v_s^T W v_t), alpha = softmax(G), h = sum_k alpha_k v_t.
// `senders` and `temporal` hold one row per seed.
FusionOutput coattend(const Matrix& senders, const Matrix& temporal, const Matrix& w);

// s(h . v_r)
double influence_prob(std::span<const double> h, std::span<const double> receiver);

// eta * sum_{v in targets} log s(h.v_r) + sum over negatives of log(1 - s(h.v_r)),
// negatives being every user outside targets and seeds.
double diffusion_loglik(std::span<const double> h, const Matrix& receivers, const Episode& ep, double eta);

// sum_i lambda_s/2 |vs_i - mu_i|^2 + lambda_r/2 |vr_i - mu_i|^2 + lambda_p/2 |vp_i|^2
double social_reg(const Matrix& senders, const Matrix& receivers, const Matrix& mu, const Matrix& popularity,
                  double lambda_s, double lambda_r, double lambda_p);

// Balanced positive weight |negatives| / |targets| for an episode over N users.
double balanced_eta(const Episode& ep, std::size_t num_users);

// Per-batch diffusion terms on a tape.
struct BatchFusion {
  Var h;  // B x D
  // Coattention only: S x 1 over the concatenated seeds of the batch.
  Var alpha;
  Var scores;
};

// Sender, receiver and popularity variables plus the fusion layer. All
// parameters live under the "diff." prefix.
class DiffusionModel {
 public:
  DiffusionModel(const Config& cfg, std::size_t num_users);

  void init_params(ParamStore& store, Rng& rng) const;
  static bool owns(const std::string& param_name);
  // With tied roles both names refer to "diff.sender".
  const std::string& sender_name() const { return sender_; }
  const std::string& receiver_name() const { return receiver_; }
  // Parameter names the diffusion phase updates.
  std::vector<std::string> param_names() const;

  BatchFusion fuse(Binder& bind, std::span<const Episode* const> batch) const;
  // Sum of per-episode log-likelihoods. `negative_rng` is used only when a
  // negative cap is configured.
  Var loglik(Binder& bind, std::span<const Episode* const> batch, Rng* negative_rng = nullptr) const;
  // Regularizer over rows `users` (all when empty) against `mu`, which holds
  // the matching rows of the posterior mean.
  Var social_reg(Binder& bind, Var mu, std::span<const UserId> users = {}) const;

  FusionOutput fuse(const ParamStore& store, std::span<const UserId> seeds) const;
  // Raw scores h . v_r for every user.
  std::vector<double> scores(const ParamStore& store, std::span<const UserId> seeds) const;
  RankResult rank_inactive(const ParamStore& store, const Episode& ep) const;
  double loglik(const ParamStore& store, const Episode& ep) const;
  double social_reg(const ParamStore& store, const Matrix& mu) const;

  double eta(const Episode& ep) const;
  std::size_t num_users() const { return num_users_; }
  std::size_t embed_dim() const { return dim_; }
  FusionMode fusion() const { return fusion_; }

 private:
  std::size_t num_users_;
  std::size_t dim_;
  FusionMode fusion_;
  bool tied_;
  std::optional<double> eta_;
  double lambda_s_;
  double lambda_r_;
  double lambda_p_;
  double init_scale_;
  std::size_t negative_cap_;
  std::string sender_;
  std::string receiver_;
  mutable PositionalTable table_;
  mutable std::mutex table_mutex_;
};

}  // namespace hivae
