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

#include "train/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"
#include "numeric/finite_diff.hpp"
#include "train/trainer.hpp"

namespace hivae {

std::string to_string(Objective o) {
  switch (o) {
    case Objective::kVae: return "vae";
    case Objective::kDiffusion: return "diffusion";
    case Objective::kSocialReg: return "social_reg";
    case Objective::kFull: return "full";
  }
  return "?";
}

GradcheckProblem make_gradcheck_problem(const Config& base, std::uint64_t seed) {
  constexpr std::size_t kUsers = 20;
  Config cfg = base;
  cfg.embed_dim = 8;
  cfg.hidden_dims = {8};
  cfg.seed = seed;
  cfg.negative_cap = 0;
  Rng rng(seed);
  std::vector<std::pair<UserId, UserId>> edges;
  for (UserId u = 0; u < kUsers; ++u) edges.emplace_back(u, (u + 1) % kUsers);
  for (UserId u = 0; u < kUsers; ++u)
    for (UserId v = u + 2; v < kUsers; ++v)
      if (rng.bernoulli(0.15)) edges.emplace_back(u, v);
  Vocabulary vocab;
  for (UserId u = 0; u < kUsers; ++u) vocab.intern("u" + std::to_string(u));
  GradcheckProblem p;
  p.model = std::make_unique<Model>(cfg, SocialNetwork::from_edges(kUsers, edges), std::move(vocab));
  p.model->init_params();
  // Move the diffusion variables away from their small init so every term
  // contributes at a comparable scale.
  for (const std::string& name : p.model->diffusion_param_names()) rng.fill_normal(p.model->params().value(name), 0.5);
  for (std::size_t e = 0; e < 5; ++e) {
    std::vector<UserId> users(kUsers);
    for (UserId u = 0; u < kUsers; ++u) users[u] = u;
    rng.shuffle(users);
    const std::size_t seeds = 1 + rng.index(4);
    const std::size_t targets = 2 + rng.index(4);
    Episode ep;
    ep.cascade_id = "g" + std::to_string(e);
    ep.seeds.assign(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(seeds));
    ep.targets.assign(users.begin() + static_cast<std::ptrdiff_t>(seeds),
                      users.begin() + static_cast<std::ptrdiff_t>(seeds + targets));
    p.episodes.push_back(std::move(ep));
  }
  p.eps = Matrix(kUsers, cfg.embed_dim);
  rng.fill_normal(p.eps);
  return p;
}

namespace {

Var build(const GradcheckProblem& p, Binder& bind, Objective o) {
  const Model& m = *p.model;
  switch (o) {
    case Objective::kVae: {
      VaeTerms t = m.vae().forward(bind, {}, p.eps);
      return ad::sub(t.recon_loglik, t.kl);
    }
    case Objective::kDiffusion: {
      std::vector<const Episode*> ptrs;
      for (const Episode& ep : p.episodes) ptrs.push_back(&ep);
      return m.diffusion().loglik(bind, ptrs);
    }
    case Objective::kSocialReg: {
      auto [mu, logvar] = m.vae().encode(bind, {});
      return m.diffusion().social_reg(bind, mu);
    }
    case Objective::kFull:
      return full_objective(m, bind, p.episodes, p.eps);
  }
  throw ContractError("unknown objective");
}

}  // namespace

double objective_value(const GradcheckProblem& p, Objective o) {
  Tape tape;
  Binder bind(tape, p.model->params());
  return build(p, bind, o).scalar();
}

ParamStore objective_gradients(GradcheckProblem& p, Objective o) {
  ParamStore& store = p.model->params();
  store.zero_grad();
  Tape tape;
  Binder bind(tape, store, [](const std::string&) { return true; });
  Var out = build(p, bind, o);
  tape.backward(out);
  ParamStore grads;
  for (const auto& param : store) grads.add(param->name, param->grad);
  return grads;
}

namespace {

// Entries above this error are re-measured with smaller steps.
constexpr double kRefineBelow = 1e-6;

}  // namespace

std::vector<TensorCheck> run_gradcheck(GradcheckProblem& p, const std::string& tensor,
                                       const std::vector<Objective>& objectives, double h) {
  ParamStore& store = p.model->params();
  std::vector<std::string> names;
  if (tensor == "all") {
    names = store.names();
  } else {
    if (!store.contains(tensor)) throw ConfigError("unknown tensor '" + tensor + "'");
    names = {tensor};
  }
  std::vector<TensorCheck> out;
  for (Objective o : objectives) {
    const ParamStore analytic = objective_gradients(p, o);
    auto f = [&](const ParamStore&) { return objective_value(p, o); };
    for (const std::string& name : names) {
      const Matrix& a = analytic.value(name);
      std::vector<double> err(a.size(), 0.0);
      for (int refine = 0; refine < 3; ++refine) {
        const Matrix numeric = finite_diff_grad5(f, store, name, h * std::pow(0.1, refine));
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double e = relative_error(a.data()[i], numeric.data()[i]);
          err[i] = refine == 0 ? e : std::min(err[i], e);
          worst = std::max(worst, err[i]);
        }
        if (worst < kRefineBelow) break;
      }
      out.push_back({o, name, a.size(), err.empty() ? 0.0 : *std::max_element(err.begin(), err.end())});
    }
  }
  return out;
}

}  // namespace hivae
