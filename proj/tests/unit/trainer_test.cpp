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
#include <filesystem>

#include "common/errors.hpp"
#include "synth/synth.hpp"
#include "test_util.hpp"
#include "train/evaluate.hpp"
#include "train/model.hpp"
#include "train/trainer.hpp"

namespace hivae {
namespace {

Config tiny_config() {
  Config cfg;
  cfg.embed_dim = 8;
  cfg.hidden_dims = {8};
  cfg.epochs = 3;
  cfg.pretrain_epochs = 5;
  cfg.episode_batch = 16;
  cfg.user_batch = 32;
  cfg.seed = 3;
  return cfg;
}

struct Data {
  SocialNetwork net;
  Vocabulary vocab;
  std::vector<Cascade> cascades;
};

Data tiny_data(std::uint64_t seed = 1) {
  Data d;
  d.net = generate_ba({60, 2, seed});
  d.vocab = testing::numbered_vocab(60);
  IcParams ic;
  ic.p = 0.25;
  ic.length = 8;
  ic.cascades = 30;
  ic.seed = seed;
  d.cascades = simulate_ic(d.net, ic).cascades;
  return d;
}

std::unique_ptr<Model> make_model(const Config& cfg, const Data& d) {
  auto m = std::make_unique<Model>(cfg, d.net, d.vocab);
  m->init_params();
  return m;
}

TEST(Pretrain, ZeroEpochsLeavesStore) {
  const Data d = tiny_data();
  auto m = make_model(tiny_config(), d);
  const auto before = m->params().checksum(m->params().names());
  EXPECT_TRUE(pretrain(*m, 0).empty());
  EXPECT_EQ(m->params().checksum(m->params().names()), before);
}

TEST(Pretrain, TouchesOnlyNetworkBlock) {
  const Data d = tiny_data();
  auto m = make_model(tiny_config(), d);
  const auto diff_before = m->params().checksum(m->diffusion_param_names());
  const auto enc_before = m->params().checksum(m->network_param_names());
  const auto log = pretrain(*m, 3);
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[0].phase, "pretrain");
  EXPECT_EQ(m->params().checksum(m->diffusion_param_names()), diff_before);
  EXPECT_NE(m->params().checksum(m->network_param_names()), enc_before);
}

TEST(Pretrain, SbmLossFallsOverFirstEpochs) {
  Rng rng(6);
  std::vector<std::pair<UserId, UserId>> edges;
  for (UserId i = 0; i < 100; ++i)
    for (UserId j = i + 1; j < 100; ++j)
      if (rng.bernoulli((i < 50) == (j < 50) ? 0.3 : 0.02)) edges.emplace_back(i, j);
  Model m(Config{}, SocialNetwork::from_edges(100, edges), testing::numbered_vocab(100));
  m.init_params();
  const auto log = pretrain(m, 5);
  // Logged loss is the negated objective; two-point moving average.
  for (std::size_t i = 2; i < log.size(); ++i)
    EXPECT_LT(log[i].loss + log[i - 1].loss, log[i - 1].loss + log[i - 2].loss) << "epoch " << i;
}

TEST(Phases, FreezeTheOtherBlock) {
  const Data d = tiny_data();
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Config cfg = tiny_config();
    cfg.seed = seed;
    if (seed % 2) {
      cfg.encoder = EncoderKind::kMlp;
      cfg.decoder = DecoderKind::kMlp;
    }
    auto m = make_model(cfg, d);
    const auto episodes = make_episodes(d.cascades);
    Rng rng(seed);

    const auto diff = m->params().checksum(m->diffusion_param_names());
    const auto net = m->params().checksum(m->network_param_names());
    network_phase(*m, rng);
    EXPECT_EQ(m->params().checksum(m->diffusion_param_names()), diff);
    const auto net_after = m->params().checksum(m->network_param_names());
    EXPECT_NE(net_after, net);

    diffusion_phase(*m, episodes, rng);
    EXPECT_EQ(m->params().checksum(m->network_param_names()), net_after);
    EXPECT_NE(m->params().checksum(m->diffusion_param_names()), diff);
  }
}

TEST(Train, DeterministicLogs) {
  const Data d = tiny_data();
  const DatasetSplit split = split_dataset(d.cascades, {0.7, 0.1, 0.2}, 3);
  auto a = make_model(tiny_config(), d);
  auto b = make_model(tiny_config(), d);
  const TrainResult ra = train(*a, split);
  const TrainResult rb = train(*b, split);
  ASSERT_EQ(ra.log.size(), rb.log.size());
  for (std::size_t i = 0; i < ra.log.size(); ++i) {
    EXPECT_EQ(ra.log[i].phase, rb.log[i].phase);
    EXPECT_LE(std::abs(ra.log[i].loss - rb.log[i].loss), 1e-12);
    EXPECT_EQ(ra.log[i].val_map, rb.log[i].val_map);
  }
  EXPECT_EQ(a->params().checksum(a->params().names()), b->params().checksum(b->params().names()));
}

TEST(Train, ZeroEpochsKeepsDiffusionInit) {
  const Data d = tiny_data();
  Config cfg = tiny_config();
  cfg.epochs = 0;
  auto m = make_model(cfg, d);
  const auto diff = m->params().checksum(m->diffusion_param_names());
  train(*m, split_dataset(d.cascades, {0.7, 0.1, 0.2}, 3));
  EXPECT_EQ(m->params().checksum(m->diffusion_param_names()), diff);
}

TEST(Train, StaticPretrainFreezesEncoderAfterPretraining) {
  const Data d = tiny_data();
  Config cfg = tiny_config();
  cfg.static_pretrain = true;
  cfg.patience = 100;
  auto m = make_model(cfg, d);
  std::optional<std::uint64_t> enc_after_pretrain;
  TrainOptions opts;
  opts.on_epoch = [&](const EpochLog& row) {
    EXPECT_NE(row.phase, "network");
    const auto now = m->params().checksum(m->network_param_names());
    if (row.phase == "diffusion") {
      if (!enc_after_pretrain) enc_after_pretrain = now;
      EXPECT_EQ(now, *enc_after_pretrain);
    }
  };
  train(*m, split_dataset(d.cascades, {0.7, 0.1, 0.2}, 3), opts);
  EXPECT_TRUE(enc_after_pretrain.has_value());
}

TEST(Train, EmptyTrainingSetRejected) {
  const Data d = tiny_data();
  auto m = make_model(tiny_config(), d);
  DatasetSplit split;
  EXPECT_THROW(train(*m, split), ConfigError);
  split.train.push_back(Cascade{"short", {0, 1}});
  EXPECT_THROW(train(*m, split), ConfigError);
}

TEST(Train, DivergenceAbortsWithLastGoodCheckpoint) {
  testing::TempDir dir("abort");
  const Data d = tiny_data();
  Config cfg = tiny_config();
  cfg.lr = 1e300;
  auto m = make_model(cfg, d);
  TrainOptions opts;
  opts.run_pretrain = false;
  opts.abort_dir = dir / "abort";
  EXPECT_THROW(train(*m, split_dataset(d.cascades, {0.7, 0.1, 0.2}, 3), opts), NumericError);
  ASSERT_TRUE(std::filesystem::exists(dir / "abort" / "checkpoint.bin"));
  auto restored = Model::load(dir / "abort");
  for (const auto& p : restored->params()) EXPECT_TRUE(p->value.all_finite()) << p->name;
}

TEST(Train, CheckpointRoundTripPreservesValidationMap) {
  testing::TempDir dir("roundtrip");
  const Data d = tiny_data();
  const DatasetSplit split = split_dataset(d.cascades, {0.7, 0.1, 0.2}, 3);
  auto m = make_model(tiny_config(), d);
  train(*m, split);
  m->save(dir.path());
  auto back = Model::load(dir.path());
  const auto val = slice_episodes(split.val, 0.3);
  EXPECT_EQ(validation_map(*m, val), validation_map(*back, val));
  EXPECT_EQ(back->config().hash(), m->config().hash());
  const std::string manifest = testing::read_file(dir / "manifest.json");
  EXPECT_NE(manifest.find(m->config().hash()), std::string::npos);
  EXPECT_NE(manifest.find(build_id()), std::string::npos);
}

TEST(Train, FullObjectiveImprovesOverFirstRounds) {
  const Data d = tiny_data(5);
  Config cfg = tiny_config();
  auto m = make_model(cfg, d);
  pretrain(*m, cfg.pretrain_epochs);
  const auto episodes = make_episodes(d.cascades);
  Rng eps_rng(77);
  Matrix eps(d.net.num_users(), cfg.embed_dim);
  eps_rng.fill_normal(eps);
  std::vector<double> values{full_objective(*m, episodes, eps)};
  Rng master(cfg.seed);
  for (std::size_t round = 1; round <= 3; ++round) {
    Rng rng = master.substream(1000 + round);
    network_phase(*m, rng);
    diffusion_phase(*m, episodes, rng);
    values.push_back(full_objective(*m, episodes, eps));
  }
  // Two-point moving average must not decrease.
  for (std::size_t i = 2; i < values.size(); ++i)
    EXPECT_GE(values[i] + values[i - 1], values[i - 1] + values[i - 2]) << "round " << i;
  EXPECT_GT(values.back(), values.front());
}

TEST(Log, FormatColumns) {
  EXPECT_EQ(format_log_header(), "epoch\tphase\tloss\tval_map@10\twall_seconds");
  const std::string row = format_log_row({4, "diffusion", 1.5, 0.25, 0.5});
  EXPECT_EQ(row.substr(0, 12), "4\tdiffusion\t");
  EXPECT_NE(row.find("\t0.25\t"), std::string::npos);
  EXPECT_NE(format_log_row({1, "network", 1.0, std::nullopt, 0.1}).find("\t-\t"), std::string::npos);
}

TEST(CostModel, LinearInEpisodesAndDim) {
  const SocialNetwork net = generate_ba({100, 2, 1});
  Config cfg;
  const CostModel a = per_epoch_cost_model(net, 50, cfg);
  const CostModel b = per_epoch_cost_model(net, 100, cfg);
  EXPECT_DOUBLE_EQ(b.diffusion, 2 * a.diffusion);
  EXPECT_EQ(b.network, a.network);
  Config wide = cfg;
  wide.embed_dim = 2 * cfg.embed_dim;
  EXPECT_DOUBLE_EQ(per_epoch_cost_model(net, 50, wide).diffusion, 2 * a.diffusion);
}

}  // namespace
}  // namespace hivae
