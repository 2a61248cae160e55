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

#include "model/graph_vae.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace hivae {

Matrix sample_z(const SocialPosterior& post, Rng& rng) {
  Matrix eps(post.mu.rows(), post.mu.cols());
  rng.fill_normal(eps);
  return sample_z(post, eps);
}

Matrix sample_z(const SocialPosterior& post, const Matrix& eps) {
  require_same_shape(post.mu, post.logvar, "sample_z");
  require_same_shape(post.mu, eps, "sample_z");
  Matrix z = post.mu;
  for (std::size_t i = 0; i < z.size(); ++i)
    z.data()[i] += eps.data()[i] * std::exp(0.5 * post.logvar.data()[i]);
  return z;
}

double kl_term(const SocialPosterior& post) {
  require_same_shape(post.mu, post.logvar, "kl_term");
  double kl = 0.0;
  for (std::size_t i = 0; i < post.mu.size(); ++i) {
    const double m = post.mu.data()[i];
    const double lv = post.logvar.data()[i];
    kl += 0.5 * (m * m + std::exp(lv) - 1.0 - lv);
  }
  return kl;
}

double recon_loglik_mlp(const Matrix& recon, const Matrix& target, double beta) {
  require_same_shape(recon, target, "recon_loglik_mlp");
  if (!(beta >= 1.0)) throw ConfigError("beta must be >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const double b = target.data()[i] > 0.0 ? beta : 1.0;
    const double r = b * (target.data()[i] - recon.data()[i]);
    total += r * r;
  }
  return -total;
}

double recon_loglik_ip(const Matrix& z, const SocialNetwork& net, double beta) {
  if (z.rows() != net.num_users()) throw ContractError("recon_loglik_ip: Z rows != users");
  double total = 0.0;
  for (UserId i = 0; i < z.rows(); ++i) {
    for (UserId j = 0; j < z.rows(); ++j) {
      if (i == j) continue;
      const double s = dot(z.row(i), z.row(j));
      total += net.has_edge(i, j) ? beta * log_sigmoid(s) : log_sigmoid(-s);
    }
  }
  return total;
}

GraphVae::GraphVae(const Config& cfg, const SocialNetwork& net, const NormalizedView& view)
    : net_(net),
      view_(view),
      encoder_(cfg.encoder),
      decoder_(cfg.decoder),
      activation_(cfg.activation),
      dim_(cfg.embed_dim),
      hidden_(cfg.hidden_dims),
      beta_(cfg.beta),
      nonedge_exact_max_users_(cfg.nonedge_exact_max_users),
      nonedge_samples_(cfg.nonedge_samples_per_user) {
  if (dim_ == 0) throw ConfigError("embed_dim must be positive");
  if (!(beta_ >= 1.0)) throw ConfigError("config key 'beta': must be >= 1");
  const bool ok = (encoder_ == EncoderKind::kGcn && decoder_ == DecoderKind::kInnerProduct) ||
                  (encoder_ == EncoderKind::kMlp && decoder_ == DecoderKind::kMlp);
  if (!ok) throw ConfigError("unsupported encoder/decoder pairing");
}

bool GraphVae::owns(const std::string& name) { return name.starts_with("enc.") || name.starts_with("dec."); }

void GraphVae::init_params(ParamStore& store, Rng& rng) const {
  const std::size_t n = net_.num_users();
  std::vector<std::size_t> enc_dims{n};
  enc_dims.insert(enc_dims.end(), hidden_.begin(), hidden_.end());
  enc_dims.push_back(2 * dim_);
  const std::string kind = encoder_ == EncoderKind::kGcn ? "gcn" : "mlp";
  for (std::size_t l = 0; l + 1 < enc_dims.size(); ++l) {
    const std::string prefix = "enc." + kind + "." + std::to_string(l);
    store.add(prefix + ".w", glorot_uniform(enc_dims[l], enc_dims[l + 1], rng));
    if (encoder_ == EncoderKind::kMlp) store.add(prefix + ".b", Matrix(1, enc_dims[l + 1]));
  }
  if (decoder_ == DecoderKind::kMlp) {
    std::vector<std::size_t> dec_dims{dim_};
    dec_dims.insert(dec_dims.end(), hidden_.rbegin(), hidden_.rend());
    dec_dims.push_back(n);
    for (std::size_t l = 0; l + 1 < dec_dims.size(); ++l) {
      const std::string prefix = "dec.mlp." + std::to_string(l);
      store.add(prefix + ".w", glorot_uniform(dec_dims[l], dec_dims[l + 1], rng));
      store.add(prefix + ".b", Matrix(1, dec_dims[l + 1]));
    }
  }
}

Var GraphVae::activate(Var x) const {
  return activation_ == Activation::kRelu ? ad::relu(x) : ad::tanh(x);
}

Var GraphVae::gcn_forward(Binder& bind) const {
  const std::size_t layers = hidden_.size() + 1;
  // Identity features: A_hat * I * W0 = A_hat * W0.
  Var h = ad::spmm(view_.a_hat, bind("enc.gcn.0.w"));
  for (std::size_t l = 1; l < layers; ++l) {
    h = activate(h);
    h = ad::spmm(view_.a_hat, ad::matmul(h, bind("enc.gcn." + std::to_string(l) + ".w")));
  }
  return h;
}

Matrix GraphVae::laplacian_rows(std::span<const UserId> users) const {
  const std::size_t n = net_.num_users();
  const std::size_t rows = users.empty() ? n : users.size();
  Matrix x(rows, n);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t u = users.empty() ? r : users[r];
    const auto& rp = view_.laplacian.row_ptr();
    for (std::size_t p = rp[u]; p < rp[u + 1]; ++p) x(r, view_.laplacian.col_idx()[p]) = view_.laplacian.values()[p];
  }
  return x;
}

Var GraphVae::mlp_encoder_forward(Binder& bind, std::span<const UserId> users) const {
  const std::size_t layers = hidden_.size() + 1;
  Var h = bind.tape().constant(laplacian_rows(users));
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string prefix = "enc.mlp." + std::to_string(l);
    h = ad::add_row(ad::matmul(h, bind(prefix + ".w")), bind(prefix + ".b"));
    if (l + 1 < layers) h = activate(h);
  }
  return h;
}

Var GraphVae::mlp_decoder_forward(Binder& bind, Var z) const {
  const std::size_t layers = hidden_.size() + 1;
  Var h = z;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string prefix = "dec.mlp." + std::to_string(l);
    h = ad::add_row(ad::matmul(h, bind(prefix + ".w")), bind(prefix + ".b"));
    if (l + 1 < layers) h = activate(h);
  }
  return h;
}

std::pair<Var, Var> GraphVae::encode(Binder& bind, std::span<const UserId> users) const {
  Var out;
  if (encoder_ == EncoderKind::kGcn) {
    out = gcn_forward(bind);
    if (!users.empty()) out = ad::gather_rows(out, std::vector<std::uint32_t>(users.begin(), users.end()));
  } else {
    out = mlp_encoder_forward(bind, users);
  }
  if (out.cols() != 2 * dim_) throw ContractError("encoder output width must be 2 * embed_dim");
  Var mu = ad::slice_cols(out, 0, dim_);
  Var logvar = ad::clamp(ad::slice_cols(out, dim_, 2 * dim_), kLogvarMin, kLogvarMax);
  return {mu, logvar};
}

SocialPosterior GraphVae::encode(const ParamStore& store) const {
  Tape tape;
  Binder bind(tape, store);
  auto [mu, logvar] = encode(bind, {});
  return SocialPosterior{mu.value(), logvar.value()};
}

namespace {

Var reparameterize(Var mu, Var logvar, const Matrix& eps) {
  return ad::add(mu, ad::mul_const(ad::exp(ad::scale(logvar, 0.5)), eps));
}

Matrix rows_of(const Matrix& m, std::span<const UserId> users) {
  Matrix out(users.size(), m.cols());
  for (std::size_t r = 0; r < users.size(); ++r) {
    auto src = m.row(users[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

VaeTerms GraphVae::forward(Binder& bind, std::span<const UserId> users, const Matrix& eps, Rng* nonedge_rng) const {
  const std::size_t n = net_.num_users();
  if (eps.rows() != n || eps.cols() != dim_) throw ContractError("GraphVae::forward: eps must be N x D");
  std::vector<UserId> all;
  if (users.empty()) {
    all.resize(n);
    for (UserId u = 0; u < n; ++u) all[u] = u;
    users = all;
  }
  VaeTerms terms;
  if (encoder_ == EncoderKind::kGcn) {
    auto [mu_all, lv_all] = encode(bind, {});
    Var z_all = reparameterize(mu_all, lv_all, eps);
    terms.recon_loglik = ip_recon(z_all, users, nonedge_rng);
    const std::vector<std::uint32_t> idx(users.begin(), users.end());
    terms.mu = ad::gather_rows(mu_all, idx);
    terms.logvar = ad::gather_rows(lv_all, idx);
  } else {
    auto [mu, lv] = encode(bind, users);
    Var z = reparameterize(mu, lv, rows_of(eps, users));
    terms.recon_loglik = mlp_recon(bind, z, users);
    terms.mu = mu;
    terms.logvar = lv;
  }
  terms.kl = ad::kl_diag_gaussian(terms.mu, terms.logvar);
  return terms;
}

Var GraphVae::ip_recon(Var z_all, std::span<const UserId> users, Rng* nonedge_rng) const {
  const std::size_t n = net_.num_users();
  const std::vector<std::uint32_t> idx(users.begin(), users.end());
  if (!subsamples_nonedges()) {
    Var logits = ad::matmul_nt(ad::gather_rows(z_all, idx), z_all);
    Matrix pos(users.size(), n), neg(users.size(), n, 1.0);
    for (std::size_t r = 0; r < users.size(); ++r) {
      neg(r, users[r]) = 0.0;
      for (UserId v : net_.neighbors(users[r])) {
        pos(r, v) = beta_;
        neg(r, v) = 0.0;
      }
    }
    return ad::weighted_logistic(logits, pos, neg);
  }
  // Exact positive term plus uniformly sampled non-edges, rescaled so the
  // estimate is unbiased for the full non-edge sum.
  if (nonedge_rng == nullptr) throw ContractError("non-edge subsampling requires an rng");
  std::vector<std::uint32_t> src, dst;
  std::vector<double> pw, nw;
  for (UserId u : users) {
    for (UserId v : net_.neighbors(u)) {
      src.push_back(u);
      dst.push_back(v);
      pw.push_back(beta_);
      nw.push_back(0.0);
    }
    const std::size_t non_edges = n - 1 - net_.degree(u);
    if (non_edges == 0) continue;
    const double w = static_cast<double>(non_edges) / static_cast<double>(nonedge_samples_);
    for (std::size_t s = 0; s < nonedge_samples_; ++s) {
      UserId v;
      do {
        v = static_cast<UserId>(nonedge_rng->index(n));
      } while (v == u || net_.has_edge(u, v));
      src.push_back(u);
      dst.push_back(v);
      pw.push_back(0.0);
      nw.push_back(w);
    }
  }
  Var logits = ad::rowdot(ad::gather_rows(z_all, src), ad::gather_rows(z_all, dst));
  return ad::weighted_logistic(logits, Matrix(pw.size(), 1, pw), Matrix(nw.size(), 1, nw));
}

Var GraphVae::mlp_recon(Binder& bind, Var z_rows, std::span<const UserId> users) const {
  Var recon = mlp_decoder_forward(bind, z_rows);
  Matrix target = laplacian_rows(users);
  Matrix weights(target.rows(), target.cols(), 1.0);
  for (std::size_t i = 0; i < target.size(); ++i)
    if (target.data()[i] > 0.0) weights.data()[i] = beta_;
  return ad::scale(ad::weighted_sq_error(recon, target, weights), -1.0);
}

}  // namespace hivae
