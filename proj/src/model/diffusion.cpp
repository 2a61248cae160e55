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

#include "model/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "common/errors.hpp"

namespace hivae {

FusionOutput coattend(const Matrix& senders, const Matrix& temporal, const Matrix& w) {
  require_same_shape(senders, temporal, "coattend");
  if (senders.rows() == 0) throw ContractError("coattend: no seeds");
  if (w.rows() != senders.cols() || w.cols() != senders.cols()) throw ContractError("coattend: W must be D x D");
  const std::size_t k = senders.rows();
  const Matrix sw = matmul(senders, w);
  FusionOutput out;
  out.scores.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.scores[i] = std::tanh(dot(sw.row(i), temporal.row(i)));
  out.alpha = softmax(out.scores);
  out.h.assign(senders.cols(), 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t d = 0; d < out.h.size(); ++d) out.h[d] += out.alpha[i] * temporal(i, d);
  return out;
}

double influence_prob(std::span<const double> h, std::span<const double> receiver) {
  return sigmoid(dot(h, receiver));
}

double diffusion_loglik(std::span<const double> h, const Matrix& receivers, const Episode& ep, double eta) {
  if (ep.targets.empty()) throw ContractError("diffusion_loglik: empty target set");
  if (!(eta >= 0.0)) throw ConfigError("eta must be non-negative");
  std::vector<char> role(receivers.rows(), 0);
  for (UserId s : ep.seeds) role.at(s) = 1;
  for (UserId t : ep.targets) role.at(t) = 2;
  double total = 0.0;
  for (UserId v = 0; v < receivers.rows(); ++v) {
    const double x = dot(h, receivers.row(v));
    if (role[v] == 2) {
      total += eta * log_sigmoid(x);
    } else if (role[v] == 0) {
      total += log_sigmoid(-x);
    }
  }
  return total;
}

double social_reg(const Matrix& senders, const Matrix& receivers, const Matrix& mu, const Matrix& popularity,
                  double lambda_s, double lambda_r, double lambda_p) {
  if (lambda_s < 0.0 || lambda_r < 0.0 || lambda_p < 0.0) throw ConfigError("regularization weights must be >= 0");
  require_same_shape(senders, mu, "social_reg");
  require_same_shape(receivers, mu, "social_reg");
  require_same_shape(popularity, mu, "social_reg");
  return 0.5 * lambda_s * sum_squares(senders - mu) + 0.5 * lambda_r * sum_squares(receivers - mu) +
         0.5 * lambda_p * sum_squares(popularity);
}

double balanced_eta(const Episode& ep, std::size_t num_users) {
  if (ep.targets.empty()) throw ContractError("balanced_eta: empty target set");
  const std::size_t active = ep.seeds.size() + ep.targets.size();
  const std::size_t negatives = num_users > active ? num_users - active : 0;
  return static_cast<double>(negatives) / static_cast<double>(ep.targets.size());
}

DiffusionModel::DiffusionModel(const Config& cfg, std::size_t num_users)
    : num_users_(num_users),
      dim_(cfg.embed_dim),
      fusion_(cfg.fusion),
      tied_(cfg.tie_sender_receiver),
      eta_(cfg.eta),
      lambda_s_(cfg.lambda_s),
      lambda_r_(cfg.lambda_r),
      lambda_p_(cfg.lambda_p),
      init_scale_(cfg.init_scale),
      negative_cap_(cfg.negative_cap),
      sender_("diff.sender"),
      receiver_(cfg.tie_sender_receiver ? "diff.sender" : "diff.receiver"),
      table_(cfg.embed_dim) {
  if (lambda_s_ < 0.0 || lambda_r_ < 0.0 || lambda_p_ < 0.0) throw ConfigError("regularization weights must be >= 0");
  if (eta_ && !(*eta_ > 0.0)) throw ConfigError("config key 'eta': must be positive");
}

bool DiffusionModel::owns(const std::string& name) { return name.starts_with("diff."); }

std::vector<std::string> DiffusionModel::param_names() const {
  std::vector<std::string> names{sender_};
  if (!tied_) names.push_back(receiver_);
  names.push_back("diff.popularity");
  switch (fusion_) {
    case FusionMode::kCoattention:
      names.push_back("diff.coattn.w");
      break;
    case FusionMode::kMeanpoolConcat:
      names.insert(names.end(), {"diff.meanpool.w", "diff.meanpool.b"});
      break;
    case FusionMode::kSeparateAttentions:
      names.insert(names.end(), {"diff.sep.u_s", "diff.sep.u_t", "diff.sep.w", "diff.sep.b"});
      break;
  }
  return names;
}

void DiffusionModel::init_params(ParamStore& store, Rng& rng) const {
  auto latent = [&](const std::string& name) {
    Matrix m(num_users_, dim_);
    rng.fill_normal(m, init_scale_);
    store.add(name, std::move(m));
  };
  latent(sender_);
  if (!tied_) latent(receiver_);
  latent("diff.popularity");
  switch (fusion_) {
    case FusionMode::kCoattention:
      store.add("diff.coattn.w", glorot_uniform(dim_, dim_, rng));
      break;
    case FusionMode::kMeanpoolConcat:
      store.add("diff.meanpool.w", glorot_uniform(2 * dim_, dim_, rng));
      store.add("diff.meanpool.b", Matrix(1, dim_));
      break;
    case FusionMode::kSeparateAttentions:
      store.add("diff.sep.u_s", glorot_uniform(dim_, 1, rng));
      store.add("diff.sep.u_t", glorot_uniform(dim_, 1, rng));
      store.add("diff.sep.w", glorot_uniform(2 * dim_, dim_, rng));
      store.add("diff.sep.b", Matrix(1, dim_));
      break;
  }
}

double DiffusionModel::eta(const Episode& ep) const { return eta_ ? *eta_ : balanced_eta(ep, num_users_); }

BatchFusion DiffusionModel::fuse(Binder& bind, std::span<const Episode* const> batch) const {
  if (batch.empty()) throw ContractError("DiffusionModel::fuse: empty batch");
  std::vector<std::uint32_t> seeds;
  std::vector<std::size_t> offsets{0};
  std::size_t longest = 0;
  for (const Episode* ep : batch) {
    if (ep->seeds.empty()) throw ContractError("episode '" + ep->cascade_id + "' has no seeds");
    seeds.insert(seeds.end(), ep->seeds.begin(), ep->seeds.end());
    offsets.push_back(seeds.size());
    longest = std::max(longest, ep->seeds.size());
  }
  Matrix pe(seeds.size(), dim_);
  std::unique_lock lock(table_mutex_);
  table_.ensure(longest);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (std::size_t k = 0; k < batch[b]->seeds.size(); ++k) {
      const auto row = table_.row(k + 1);
      std::copy(row.begin(), row.end(), pe.row(offsets[b] + k).begin());
    }
  }
  lock.unlock();
  Tape& tape = bind.tape();
  Var vs = ad::gather_rows(bind(sender_), seeds);
  Var vt = ad::add(ad::gather_rows(bind("diff.popularity"), seeds), tape.constant(std::move(pe)));
  BatchFusion out;
  switch (fusion_) {
    case FusionMode::kCoattention: {
      out.scores = ad::tanh(ad::rowdot(ad::matmul(vs, bind("diff.coattn.w")), vt));
      out.alpha = ad::segment_softmax(out.scores, offsets);
      out.h = ad::segment_weighted_sum(out.alpha, vt, offsets);
      break;
    }
    case FusionMode::kMeanpoolConcat: {
      Var pooled = ad::segment_mean(ad::concat_cols(vs, vt), offsets);
      out.h = ad::add_row(ad::matmul(pooled, bind("diff.meanpool.w")), bind("diff.meanpool.b"));
      break;
    }
    case FusionMode::kSeparateAttentions: {
      Var alpha_s = ad::segment_softmax(ad::tanh(ad::matmul(vs, bind("diff.sep.u_s"))), offsets);
      out.scores = ad::tanh(ad::matmul(vt, bind("diff.sep.u_t")));
      out.alpha = ad::segment_softmax(out.scores, offsets);
      Var ctx = ad::concat_cols(ad::segment_weighted_sum(alpha_s, vs, offsets),
                                ad::segment_weighted_sum(out.alpha, vt, offsets));
      out.h = ad::add_row(ad::matmul(ctx, bind("diff.sep.w")), bind("diff.sep.b"));
      break;
    }
  }
  return out;
}

Var DiffusionModel::loglik(Binder& bind, std::span<const Episode* const> batch, Rng* negative_rng) const {
  BatchFusion fused = fuse(bind, batch);
  Var receivers = bind(receiver_);
  const std::size_t n = num_users_;
  if (negative_cap_ == 0) {
    Var logits = ad::matmul_nt(fused.h, receivers);
    Matrix pos(batch.size(), n), neg(batch.size(), n, 1.0);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const Episode& ep = *batch[b];
      if (ep.targets.empty()) throw ContractError("episode '" + ep.cascade_id + "' has no targets");
      const double e = eta(ep);
      for (UserId s : ep.seeds) neg(b, s) = 0.0;
      for (UserId t : ep.targets) {
        pos(b, t) = e;
        neg(b, t) = 0.0;
      }
    }
    return ad::weighted_logistic(logits, pos, neg);
  }
  // Sampled negatives, reweighted so the sum estimates the full complement.
  if (negative_rng == nullptr) throw ContractError("negative sampling requires an rng");
  std::vector<std::uint32_t> rows, users;
  std::vector<double> pw, nw;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Episode& ep = *batch[b];
    if (ep.targets.empty()) throw ContractError("episode '" + ep.cascade_id + "' has no targets");
    const double e = eta(ep);
    std::unordered_set<UserId> active(ep.seeds.begin(), ep.seeds.end());
    for (UserId t : ep.targets) {
      rows.push_back(static_cast<std::uint32_t>(b));
      users.push_back(t);
      pw.push_back(e);
      nw.push_back(0.0);
      active.insert(t);
    }
    const std::size_t pool = n - active.size();
    if (pool == 0) continue;
    if (pool <= negative_cap_) {
      for (UserId v = 0; v < n; ++v) {
        if (active.contains(v)) continue;
        rows.push_back(static_cast<std::uint32_t>(b));
        users.push_back(v);
        pw.push_back(0.0);
        nw.push_back(1.0);
      }
      continue;
    }
    const double w = static_cast<double>(pool) / static_cast<double>(negative_cap_);
    std::unordered_set<UserId> picked;
    while (picked.size() < negative_cap_) {
      const auto v = static_cast<UserId>(negative_rng->index(n));
      if (active.contains(v) || !picked.insert(v).second) continue;
      rows.push_back(static_cast<std::uint32_t>(b));
      users.push_back(v);
      pw.push_back(0.0);
      nw.push_back(w);
    }
  }
  Var logits = ad::rowdot(ad::gather_rows(fused.h, rows), ad::gather_rows(receivers, users));
  return ad::weighted_logistic(logits, Matrix(pw.size(), 1, pw), Matrix(nw.size(), 1, nw));
}

Var DiffusionModel::social_reg(Binder& bind, Var mu, std::span<const UserId> users) const {
  auto rows = [&](const std::string& name) {
    Var v = bind(name);
    return users.empty() ? v : ad::gather_rows(v, std::vector<std::uint32_t>(users.begin(), users.end()));
  };
  Var vs = rows(sender_);
  Var vr = rows(receiver_);
  Var vp = rows("diff.popularity");
  Var reg = ad::scale(ad::sum_squares(ad::sub(vs, mu)), 0.5 * lambda_s_);
  reg = ad::add(reg, ad::scale(ad::sum_squares(ad::sub(vr, mu)), 0.5 * lambda_r_));
  return ad::add(reg, ad::scale(ad::sum_squares(vp), 0.5 * lambda_p_));
}

FusionOutput DiffusionModel::fuse(const ParamStore& store, std::span<const UserId> seeds) const {
  Episode ep;
  ep.seeds.assign(seeds.begin(), seeds.end());
  const Episode* batch[] = {&ep};
  Tape tape;
  Binder bind(tape, store);
  BatchFusion f = fuse(bind, batch);
  FusionOutput out;
  const auto h = f.h.value().row(0);
  out.h.assign(h.begin(), h.end());
  if (fusion_ != FusionMode::kMeanpoolConcat) {
    out.alpha.assign(f.alpha.value().data(), f.alpha.value().data() + f.alpha.value().size());
    out.scores.assign(f.scores.value().data(), f.scores.value().data() + f.scores.value().size());
  }
  return out;
}

std::vector<double> DiffusionModel::scores(const ParamStore& store, std::span<const UserId> seeds) const {
  const FusionOutput f = fuse(store, seeds);
  const Matrix& receivers = store.value(receiver_);
  std::vector<double> out(num_users_);
  for (UserId v = 0; v < num_users_; ++v) out[v] = dot(f.h, receivers.row(v));
  return out;
}

RankResult DiffusionModel::rank_inactive(const ParamStore& store, const Episode& ep) const {
  const std::vector<double> s = scores(store, ep.seeds);
  RankResult r = rank_by_scores(s, ep.seeds, ep.targets);
  r.cascade_id = ep.cascade_id;
  return r;
}

double DiffusionModel::loglik(const ParamStore& store, const Episode& ep) const {
  const FusionOutput f = fuse(store, ep.seeds);
  return diffusion_loglik(f.h, store.value(receiver_), ep, eta(ep));
}

double DiffusionModel::social_reg(const ParamStore& store, const Matrix& mu) const {
  return hivae::social_reg(store.value(sender_), store.value(receiver_), mu, store.value("diff.popularity"),
                           lambda_s_, lambda_r_, lambda_p_);
}

}  // namespace hivae
