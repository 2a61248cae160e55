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

#include "train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "common/errors.hpp"
#include "train/evaluate.hpp"

namespace hivae {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

AdamConfig adam_config(const Config& cfg, double lr) { return {lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps}; }

void require_finite(double loss, const char* phase) {
  if (!std::isfinite(loss)) throw NumericError(std::string("non-finite loss in ") + phase + " phase");
}

std::vector<UserId> shuffled_users(std::size_t n, Rng& rng) {
  std::vector<UserId> users(n);
  std::iota(users.begin(), users.end(), 0);
  rng.shuffle(users);
  return users;
}

// One VAE pass; `with_reg` adds the coupling to the (frozen) diffusion
// variables.
double vae_pass(Model& model, Rng& rng, double lr, bool with_reg) {
  const Config& cfg = model.config();
  const std::size_t n = model.network().num_users();
  const auto names = model.network_param_names();
  const auto users = shuffled_users(n, rng);
  const AdamConfig adam = adam_config(cfg, lr);
  double total = 0.0;
  for (std::size_t begin = 0; begin < n; begin += cfg.user_batch) {
    const std::size_t end = std::min(n, begin + cfg.user_batch);
    const std::span<const UserId> batch(users.data() + begin, end - begin);
    Matrix eps(n, cfg.embed_dim);
    rng.fill_normal(eps);
    model.params().zero_grad();
    Tape tape;
    Binder bind(tape, model.params(), [](const std::string& name) { return GraphVae::owns(name); });
    VaeTerms terms = model.vae().forward(bind, batch, eps, &rng);
    Var objective = ad::sub(terms.recon_loglik, terms.kl);
    if (with_reg) objective = ad::sub(objective, model.diffusion().social_reg(bind, terms.mu, batch));
    Var loss = ad::scale(objective, -1.0);
    require_finite(loss.scalar(), with_reg ? "network" : "pretrain");
    tape.backward(loss);
    adam_step(model.params(), names, adam);
    total += loss.scalar();
  }
  return total;
}

}  // namespace

std::string format_log_header() { return "epoch\tphase\tloss\tval_map@10\twall_seconds"; }

std::string format_log_row(const EpochLog& row) {
  std::ostringstream out;
  out << row.epoch << '\t' << row.phase << '\t' << std::setprecision(17) << row.loss << '\t';
  if (row.val_map) {
    out << *row.val_map;
  } else {
    out << '-';
  }
  out << '\t' << std::setprecision(6) << row.seconds;
  return out.str();
}

std::vector<EpochLog> pretrain(Model& model, std::size_t epochs, const TrainOptions& opts) {
  Rng rng = Rng(model.config().seed).substream(3);
  std::vector<EpochLog> log;
  for (std::size_t e = 1; e <= epochs; ++e) {
    const auto t0 = Clock::now();
    const double loss = vae_pass(model, rng, model.config().pretrain_lr, false);
    log.push_back({e, "pretrain", loss, std::nullopt, seconds_since(t0)});
    if (opts.on_epoch) opts.on_epoch(log.back());
  }
  return log;
}

double network_phase(Model& model, Rng& rng) { return vae_pass(model, rng, model.config().lr, true); }

double diffusion_phase(Model& model, std::span<const Episode> episodes, Rng& rng) {
  if (episodes.empty()) throw ConfigError("no training episodes");
  const Config& cfg = model.config();
  const auto names = model.diffusion_param_names();
  const AdamConfig adam = adam_config(cfg, cfg.lr);
  const Matrix mu = model.posterior_mean();
  std::vector<const Episode*> order(episodes.size());
  for (std::size_t i = 0; i < episodes.size(); ++i) order[i] = &episodes[i];
  rng.shuffle(order);
  const double total_episodes = static_cast<double>(episodes.size());
  double total = 0.0;
  for (std::size_t begin = 0; begin < order.size(); begin += cfg.episode_batch) {
    const std::size_t end = std::min(order.size(), begin + cfg.episode_batch);
    const std::span<const Episode* const> batch(order.data() + begin, end - begin);
    model.params().zero_grad();
    Tape tape;
    Binder bind(tape, model.params(), [](const std::string& name) { return DiffusionModel::owns(name); });
    Var ll = model.diffusion().loglik(bind, batch, &rng);
    Var reg = model.diffusion().social_reg(bind, tape.constant_ref(mu));
    const auto b = static_cast<double>(batch.size());
    Var objective = cfg.batch_scaling == BatchScaling::kSum
                        ? ad::sub(ll, ad::scale(reg, b / total_episodes))
                        : ad::sub(ad::scale(ll, 1.0 / b), reg);
    Var loss = ad::scale(objective, -1.0);
    require_finite(loss.scalar(), "diffusion");
    tape.backward(loss);
    adam_step(model.params(), names, adam);
    total += loss.scalar();
  }
  return total;
}

TrainResult train(Model& model, const DatasetSplit& split, const TrainOptions& opts) {
  const Config& cfg = model.config();
  if (split.train.empty()) throw ConfigError("training set is empty");
  if (model.params().size() == 0) model.init_params();
  Rng master(cfg.seed);
  Rng episode_rng = master.substream(4);
  const std::vector<Episode> episodes = make_episodes(split.train, cfg.max_episodes_per_cascade, &episode_rng);
  if (episodes.empty()) throw ConfigError("training cascades yield no episodes (need length >= 3)");
  const std::vector<Episode> val = slice_episodes(split.val, cfg.val_seed_pct);

  TrainResult result;
  ParamStore best = model.params();
  auto emit = [&](EpochLog row) {
    result.log.push_back(std::move(row));
    if (opts.on_epoch) opts.on_epoch(result.log.back());
  };
  try {
    if (opts.run_pretrain) {
      TrainOptions inner;
      inner.on_epoch = emit;
      pretrain(model, cfg.pretrain_epochs, inner);
    }
    best = model.params();
    result.best_val_map = -std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      Rng rng = master.substream(1000 + epoch);
      if (!cfg.static_pretrain) {
        const auto t0 = Clock::now();
        const double loss = network_phase(model, rng);
        emit({epoch, "network", loss, std::nullopt, seconds_since(t0)});
      }
      const auto t0 = Clock::now();
      const double loss = diffusion_phase(model, episodes, rng);
      std::optional<double> val_map;
      if (!val.empty()) val_map = validation_map(model, val, 10, cfg.threads);
      emit({epoch, "diffusion", loss, val_map, seconds_since(t0)});
      result.epochs_run = epoch;
      const double score = val_map.value_or(0.0);
      if (val.empty() || score > result.best_val_map) {
        result.best_val_map = score;
        result.best_epoch = epoch;
        best = model.params();
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        result.stopped_early = true;
        break;
      }
    }
  } catch (const NumericError&) {
    model.params() = best;
    if (opts.abort_dir) model.save(*opts.abort_dir);
    throw;
  }
  if (result.epochs_run == 0) result.best_val_map = 0.0;
  model.params() = best;
  return result;
}

Var full_objective(const Model& model, Binder& bind, std::span<const Episode> episodes, const Matrix& eps) {
  VaeTerms terms = model.vae().forward(bind, {}, eps);
  Var objective = ad::sub(terms.recon_loglik, terms.kl);
  if (!episodes.empty()) {
    std::vector<const Episode*> ptrs;
    for (const Episode& ep : episodes) ptrs.push_back(&ep);
    objective = ad::add(objective, model.diffusion().loglik(bind, ptrs));
  }
  return ad::sub(objective, model.diffusion().social_reg(bind, terms.mu));
}

double full_objective(const Model& model, std::span<const Episode> episodes, const Matrix& eps) {
  Tape tape;
  Binder bind(tape, model.params());
  return full_objective(model, bind, episodes, eps).scalar();
}

CostModel per_epoch_cost_model(const SocialNetwork& net, std::size_t episodes, const Config& cfg) {
  double f = 0.0;
  for (std::size_t h : cfg.hidden_dims) f = std::max(f, static_cast<double>(h));
  const double e = static_cast<double>(net.num_edges());
  const double d = static_cast<double>(cfg.embed_dim);
  CostModel c;
  c.network = e * f * f + e * d;
  c.diffusion = static_cast<double>(episodes) * d * static_cast<double>(net.num_users());
  return c;
}

}  // namespace hivae
