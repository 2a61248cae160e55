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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "common/errors.hpp"
#include "model/diffusion.hpp"
#include "test_util.hpp"
#include "train/gradcheck.hpp"

namespace hivae {
namespace {

Matrix rows_of(std::vector<std::vector<double>> rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

TEST(Coattend, SingleSeed) {
  Rng rng(1);
  const Matrix vs = testing::random_matrix(1, 3, rng);
  const Matrix vt = testing::random_matrix(1, 3, rng);
  const FusionOutput out = coattend(vs, vt, testing::random_matrix(3, 3, rng));
  ASSERT_EQ(out.alpha.size(), 1u);
  EXPECT_EQ(out.alpha[0], 1.0);
  for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(out.h[d], vt(0, d));
}

TEST(Coattend, HandEvaluatedExample) {
  const Matrix e1 = rows_of({{1, 0}, {0, 0}});
  const FusionOutput out = coattend(e1, e1, Matrix::identity(2));
  EXPECT_NEAR(out.scores[0], 0.76159, 1e-5);
  EXPECT_EQ(out.scores[1], 0.0);
  EXPECT_NEAR(out.alpha[0], 0.68170, 1e-5);
  EXPECT_NEAR(out.alpha[1], 0.31830, 1e-5);
  EXPECT_NEAR(out.h[0], 0.68170, 1e-5);
  EXPECT_EQ(out.h[1], 0.0);
}

TEST(Coattend, ZeroWeightGivesUniformAttention) {
  Rng rng(2);
  const FusionOutput out = coattend(testing::random_matrix(4, 3, rng), testing::random_matrix(4, 3, rng), Matrix(3, 3));
  for (double a : out.alpha) EXPECT_EQ(a, 0.25);
}

TEST(Coattend, AttentionPropertiesOnRandomInputs) {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const std::size_t k = 1 + rng.index(12), d = 1 + rng.index(6);
    const Matrix vs = testing::random_matrix(k, d, rng);
    const Matrix vt = testing::random_matrix(k, d, rng);
    const FusionOutput out = coattend(vs, vt, testing::random_matrix(d, d, rng));
    double total = 0.0;
    std::vector<double> h(d, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      ASSERT_GT(out.alpha[i], 0.0);
      total += out.alpha[i];
      for (std::size_t j = 0; j < d; ++j) h[j] += out.alpha[i] * vt(i, j);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(out.h[j], h[j], 1e-12);
    // Shift invariance of the softmax.
    std::vector<double> shifted(out.scores);
    for (double& s : shifted) s += 3.7;
    const auto alpha2 = softmax(shifted);
    for (std::size_t i = 0; i < k; ++i) EXPECT_NEAR(alpha2[i], out.alpha[i], 1e-12);
  }
}

TEST(InfluenceProb, Examples) {
  const std::vector<double> zero(3, 0.0), r{1, 2, 3};
  EXPECT_EQ(influence_prob(zero, r), 0.5);
  const std::vector<double> h{4.0}, one{1.0};
  EXPECT_NEAR(influence_prob(h, one), 0.98201, 1e-5);
}

TEST(DiffusionLoglik, Examples) {
  // N = 3: seed 0, target 1, negative 2, all scores zero.
  const Episode ep{"c", {0}, {1}};
  const std::vector<double> h(2, 0.0);
  Rng rng(4);
  const Matrix vr = testing::random_matrix(3, 2, rng);
  EXPECT_NEAR(diffusion_loglik(h, vr, ep, 1.0), 2 * std::log(0.5), 1e-15);
  EXPECT_NEAR(diffusion_loglik(h, vr, ep, 0.0), std::log(0.5), 1e-15);
  EXPECT_THROW(diffusion_loglik(h, vr, ep, -1.0), ConfigError);

  // Perfect separation approaches zero from below.
  const std::vector<double> big{50.0, 0.0};
  const Matrix sep = rows_of({{0, 0}, {1, 0}, {-1, 0}});
  const double ll = diffusion_loglik(big, sep, ep, 1.0);
  EXPECT_LT(ll, 0.0);
  EXPECT_GT(ll, -1e-20);
}

TEST(DiffusionLoglik, BruteForceOracle) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 6 + rng.index(10), d = 1 + rng.index(4);
    const Matrix vr = testing::random_matrix(n, d, rng);
    std::vector<double> h(d);
    for (double& v : h) v = rng.normal();
    std::vector<UserId> users(n);
    for (UserId i = 0; i < n; ++i) users[i] = i;
    rng.shuffle(users);
    const std::size_t ns = 1 + rng.index(3), nt = 1 + rng.index(3);
    Episode ep{"c", {users.begin(), users.begin() + ns}, {users.begin() + ns, users.begin() + ns + nt}};
    const double eta = rng.uniform(0, 5);
    double ref = 0.0;
    for (UserId u = 0; u < n; ++u) {
      const double p = sigmoid(dot(h, vr.row(u)));
      const bool seed = std::find(ep.seeds.begin(), ep.seeds.end(), u) != ep.seeds.end();
      const bool target = std::find(ep.targets.begin(), ep.targets.end(), u) != ep.targets.end();
      if (target) ref += eta * std::log(p);
      else if (!seed) ref += std::log(1 - p);
    }
    EXPECT_NEAR(diffusion_loglik(h, vr, ep, eta), ref, 1e-10 * (1 + std::abs(ref)));
  }
}

TEST(BalancedEta, NegativesOverTargets) {
  const Episode ep{"c", {0, 1}, {2, 3}};
  EXPECT_EQ(balanced_eta(ep, 10), 6.0 / 2.0);
}

TEST(SocialReg, Examples) {
  Rng rng(6);
  const Matrix mu = testing::random_matrix(4, 3, rng);
  EXPECT_EQ(social_reg(mu, mu, mu, Matrix(4, 3), 0.3, 0.7, 0.9), 0.0);
  EXPECT_EQ(social_reg(testing::random_matrix(4, 3, rng), testing::random_matrix(4, 3, rng), mu,
                       testing::random_matrix(4, 3, rng), 0.0, 0.0, 0.0),
            0.0);
  EXPECT_DOUBLE_EQ(social_reg(Matrix(1, 1, 2.0), Matrix(1, 1), Matrix(1, 1), Matrix(1, 1), 0.1, 0.0, 0.0), 0.2);
  EXPECT_THROW(social_reg(mu, mu, mu, mu, -0.1, 0.0, 0.0), ConfigError);
}

// Model-level fixture over N users.
struct Fixture {
  Config cfg;
  DiffusionModel model;
  ParamStore store;
  Fixture(Config c, std::size_t n) : cfg(std::move(c)), model(cfg, n) {
    Rng rng(7);
    model.init_params(store, rng);
    Rng fill(8);
    for (auto& p : store) fill.fill_normal(p->value, 0.5);
  }
};

Config with_fusion(FusionMode m, std::size_t dim = 4) {
  Config cfg;
  cfg.embed_dim = dim;
  cfg.fusion = m;
  return cfg;
}

TEST(RankInactive, ExcludesSeedsAndSizes) {
  Fixture f(with_fusion(FusionMode::kCoattention), 30);
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<UserId> users(30);
    for (UserId i = 0; i < 30; ++i) users[i] = i;
    rng.shuffle(users);
    const std::size_t ns = 1 + rng.index(10);
    const Episode ep{"c", {users.begin(), users.begin() + ns}, {users[ns]}};
    const RankResult r = f.model.rank_inactive(f.store, ep);
    ASSERT_EQ(r.ranked.size(), 30 - ns);
    const std::set<UserId> seeds(ep.seeds.begin(), ep.seeds.end());
    for (std::size_t i = 0; i < r.ranked.size(); ++i) {
      ASSERT_FALSE(seeds.contains(r.ranked[i].user));
      if (i) ASSERT_GE(r.ranked[i - 1].score, r.ranked[i].score);
    }
  }
}

TEST(RankInactive, MonotoneTransformInvariant) {
  Fixture f(with_fusion(FusionMode::kCoattention), 25);
  const std::vector<UserId> seeds{3, 9, 1};
  const auto raw = f.model.scores(f.store, seeds);
  std::vector<double> probs(raw);
  for (double& v : probs) v = sigmoid(v);
  const RankResult a = rank_by_scores(raw, seeds, {});
  const RankResult b = rank_by_scores(probs, seeds, {});
  for (std::size_t i = 0; i < a.ranked.size(); ++i) EXPECT_EQ(a.ranked[i].user, b.ranked[i].user);
}

TEST(RankInactive, OrderAndTieRule) {
  const std::vector<double> scores{3.0, -1.0, 5.0, 5.0};
  const std::vector<UserId> seeds{2};
  const RankResult r = rank_by_scores(scores, seeds, {});
  ASSERT_EQ(r.ranked.size(), 3u);
  EXPECT_EQ(r.ranked[0].user, 3u);
  EXPECT_EQ(r.ranked[1].user, 0u);
  EXPECT_EQ(r.ranked[2].user, 1u);
  const std::vector<double> tied{1.0, 1.0, 1.0};
  const RankResult t = rank_by_scores(tied, {}, {});
  EXPECT_EQ(t.ranked[0].user, 0u);
  EXPECT_EQ(t.ranked[2].user, 2u);
}

TEST(Fusion, MeanpoolSingleSeedIsDenseOfConcat) {
  Fixture f(with_fusion(FusionMode::kMeanpoolConcat, 4), 6);
  const std::vector<UserId> seeds{4};
  const FusionOutput out = f.model.fuse(f.store, seeds);
  PositionalTable table(4);
  const auto vt = temporal_variable(f.store.value("diff.popularity"), table, 4, 1);
  const auto vs = f.store.value("diff.sender").row(4);
  std::vector<double> cat(vs.begin(), vs.end());
  cat.insert(cat.end(), vt.begin(), vt.end());
  const Matrix& w = f.store.value("diff.meanpool.w");
  const Matrix& b = f.store.value("diff.meanpool.b");
  ASSERT_EQ(out.h.size(), 4u);
  for (std::size_t j = 0; j < 4; ++j) {
    double ref = b(0, j);
    for (std::size_t i = 0; i < 8; ++i) ref += cat[i] * w(i, j);
    EXPECT_NEAR(out.h[j], ref, 1e-12);
  }
}

TEST(Fusion, SeparateAttentionsSingleSeed) {
  Fixture f(with_fusion(FusionMode::kSeparateAttentions), 6);
  const std::vector<UserId> seeds{2};
  const FusionOutput out = f.model.fuse(f.store, seeds);
  ASSERT_EQ(out.alpha.size(), 1u);
  EXPECT_EQ(out.alpha[0], 1.0);
}

TEST(TiedRoles, ShareOneTensor) {
  Config cfg = with_fusion(FusionMode::kCoattention);
  cfg.tie_sender_receiver = true;
  Fixture f(cfg, 8);
  EXPECT_EQ(f.model.sender_name(), f.model.receiver_name());
  EXPECT_FALSE(f.store.contains("diff.receiver"));
  // Gradient reaches the shared tensor from both roles.
  std::vector<Episode> batch{{"c", {1, 2}, {5}}};
  std::vector<const Episode*> ptrs{&batch[0]};
  f.store.zero_grad();
  Tape tape;
  Binder bind(tape, f.store, [](const std::string&) { return true; });
  tape.backward(f.model.loglik(bind, ptrs));
  const Matrix& g = f.store.get("diff.sender").grad;
  double seed_rows = 0.0, other_rows = 0.0;
  for (std::size_t d = 0; d < g.cols(); ++d) {
    seed_rows += std::abs(g(1, d));
    other_rows += std::abs(g(6, d));
  }
  EXPECT_GT(seed_rows, 0.0);
  EXPECT_GT(other_rows, 0.0);
}

TEST(DiffusionModel, TapeLoglikMatchesValueLevel) {
  for (FusionMode m : {FusionMode::kCoattention, FusionMode::kMeanpoolConcat, FusionMode::kSeparateAttentions}) {
    Fixture f(with_fusion(m), 12);
    std::vector<Episode> batch{{"a", {1, 2, 3}, {4, 5}}, {"b", {7}, {0, 11, 2}}, {"c", {9, 8}, {10}}};
    std::vector<const Episode*> ptrs;
    double ref = 0.0;
    for (const Episode& e : batch) {
      ptrs.push_back(&e);
      ref += f.model.loglik(f.store, e);
    }
    Tape tape;
    Binder bind(tape, f.store);
    EXPECT_NEAR(f.model.loglik(bind, ptrs).scalar(), ref, 1e-9 * std::abs(ref)) << to_string(m);
  }
}

TEST(DiffusionModel, NegativeLambdaRejected) {
  Config cfg;
  cfg.lambda_r = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

class DiffusionGradient : public ::testing::TestWithParam<int> {};

TEST_P(DiffusionGradient, LoglikMinusRegMatchesFiniteDifferences) {
  Config cfg;
  switch (GetParam()) {
    case 1: cfg.fusion = FusionMode::kMeanpoolConcat; break;
    case 2: cfg.fusion = FusionMode::kSeparateAttentions; break;
    case 3: cfg.tie_sender_receiver = true; break;
    default: break;
  }
  GradcheckProblem p = make_gradcheck_problem(cfg, 4);
  for (const TensorCheck& c : run_gradcheck(p, "all", {Objective::kDiffusion, Objective::kSocialReg})) {
    if (c.tensor.rfind("diff.", 0) != 0) continue;
    EXPECT_LT(c.max_rel_error, 1e-4) << to_string(c.objective) << " " << c.tensor;
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, DiffusionGradient, ::testing::Values(0, 1, 2, 3));

}  // namespace
}  // namespace hivae
