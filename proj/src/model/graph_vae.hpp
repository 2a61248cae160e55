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
#include <string>
#include <vector>

#include "graph/social_network.hpp"
#include "numeric/matrix.hpp"
#include "numeric/rng.hpp"
#include "numeric/tape.hpp"
#include "train/config.hpp"

namespace hivae {

inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;

// q(Z | G) = N(mu, diag(exp(logvar))), one row per user.
struct SocialPosterior {
  Matrix mu;
  Matrix logvar;
};

// Reparameterized draw Z = mu + eps * exp(0.5 * logvar), eps ~ N(0, I).
Matrix sample_z(const SocialPosterior& post, Rng& rng);
Matrix sample_z(const SocialPosterior& post, const Matrix& eps);

// sum 0.5 * (mu^2 + sigma^2 - 1 - log sigma^2); zero iff mu = 0, logvar = 0.
double kl_term(const SocialPosterior& post);

// -sum_i || b_i * (a_i - recon_i) ||^2 with b = beta where a > 0, else 1.
// `target` and `recon` hold the same rows of the normalized matrix and its
// reconstruction.
double recon_loglik_mlp(const Matrix& recon, const Matrix& target, double beta);

// beta * sum_{(i,j) in E} log s(z_i.z_j) + sum_{(i,j) not in E, i != j}
// log(1 - s(z_i.z_j)) over ordered pairs.
double recon_loglik_ip(const Matrix& z, const SocialNetwork& net, double beta);

// Per-batch VAE terms on a tape.
struct VaeTerms {
  Var recon_loglik;
  Var kl;
  // Posterior rows of the batch users, in batch order.
  Var mu;
  Var logvar;
};

// Inference network f_enc and generative network f_dec for both supported
// pairings (GCN encoder with inner-product decoder, MLP with MLP). Weights
// live in a ParamStore under the "enc." and "dec." prefixes.
class GraphVae {
 public:
  GraphVae(const Config& cfg, const SocialNetwork& net, const NormalizedView& view);

  void init_params(ParamStore& store, Rng& rng) const;
  static bool owns(const std::string& param_name);

  // Posterior for every user, evaluated without recording gradients.
  SocialPosterior encode(const ParamStore& store) const;

  // Reconstruction log-likelihood and KL restricted to rows `users`, with
  // Z drawn from `eps` (N x D, one row per user). `nonedge_rng` is only
  // consulted when the non-edge term is subsampled.
  VaeTerms forward(Binder& bind, std::span<const UserId> users, const Matrix& eps,
                   Rng* nonedge_rng = nullptr) const;

  // Posterior rows for `users` on a tape (all users when empty for GCN).
  std::pair<Var, Var> encode(Binder& bind, std::span<const UserId> users) const;

  std::size_t embed_dim() const { return dim_; }
  std::size_t num_users() const { return net_.num_users(); }
  const NormalizedView& view() const { return view_; }
  const SocialNetwork& network() const { return net_; }
  bool subsamples_nonedges() const { return net_.num_users() > nonedge_exact_max_users_; }

 private:
  Var activate(Var x) const;
  Var gcn_forward(Binder& bind) const;
  Var mlp_encoder_forward(Binder& bind, std::span<const UserId> users) const;
  Var mlp_decoder_forward(Binder& bind, Var z) const;
  Var ip_recon(Var z_all, std::span<const UserId> users, Rng* nonedge_rng) const;
  Var mlp_recon(Binder& bind, Var z_rows, std::span<const UserId> users) const;
  Matrix laplacian_rows(std::span<const UserId> users) const;

  const SocialNetwork& net_;
  const NormalizedView& view_;
  EncoderKind encoder_;
  DecoderKind decoder_;
  Activation activation_;
  std::size_t dim_;
  std::vector<std::size_t> hidden_;
  double beta_;
  std::size_t nonedge_exact_max_users_;
  std::size_t nonedge_samples_;
};

}  // namespace hivae
