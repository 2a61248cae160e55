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

#include "synth/synth.hpp"
#include "test_util.hpp"
#include "train/evaluate.hpp"

namespace hivae {
namespace {

std::vector<Cascade> cascades_of(std::vector<std::vector<UserId>> users) {
  std::vector<Cascade> out;
  for (std::size_t i = 0; i < users.size(); ++i) out.push_back({"c" + std::to_string(i), users[i]});
  return out;
}

TEST(SliceEpisodes, DropsCascadesWithNothingLeft) {
  const auto eps = slice_episodes(cascades_of({{0, 1, 2, 3}, {4}, {5, 6}}), 0.5);
  ASSERT_EQ(eps.size(), 2u);
  EXPECT_EQ(eps[0].seeds, (std::vector<UserId>{0, 1}));
  EXPECT_EQ(eps[1].seeds, (std::vector<UserId>{5}));
  EXPECT_EQ(eps[1].targets, (std::vector<UserId>{6}));
}

TEST(Scorers, DegreeAndRandom) {
  const SocialNetwork net = SocialNetwork::from_edges(4, std::vector<std::pair<UserId, UserId>>{{0, 1}, {0, 2}, {0, 3}, {1, 2}});
  const Episode ep{"c", {3}, {1}};
  const auto deg = degree_scorer(net)(ep);
  EXPECT_EQ(deg, (std::vector<double>{3, 2, 2, 1}));
  const Scorer rnd = random_scorer(4, 9);
  EXPECT_EQ(rnd(ep), rnd(ep));
  EXPECT_NE(rnd(ep), random_scorer(4, 10)(ep));
}

TEST(RankEpisodes, ThreadCountDoesNotChangeResults) {
  const SocialNetwork net = generate_ba({80, 2, 1});
  IcParams ic;
  ic.length = 6;
  ic.cascades = 40;
  ic.p = 0.3;
  const auto cascades = simulate_ic(net, ic).cascades;
  const auto eps = slice_episodes(cascades, 0.3);
  const Scorer rnd = random_scorer(80, 4);
  const auto one = rank_episodes(rnd, eps, 1);
  const auto four = rank_episodes(rnd, eps, 4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].cascade_id, four[i].cascade_id);
    ASSERT_EQ(one[i].ranked.size(), four[i].ranked.size());
    for (std::size_t j = 0; j < one[i].ranked.size(); ++j) EXPECT_EQ(one[i].ranked[j].user, four[i].ranked[j].user);
  }
}

TEST(RankEpisodes, PropagatesScorerErrors) {
  const std::vector<Episode> eps{{"a", {0}, {1}}, {"b", {0}, {1}}};
  const Scorer bad = [](const Episode&) -> std::vector<double> { throw std::runtime_error("boom"); };
  EXPECT_THROW(rank_episodes(bad, eps, 2), std::runtime_error);
}

TEST(GroupingStatistics, ActivityAndSeedNeighbors) {
  const auto cs = cascades_of({{0, 1, 2}, {1, 3}, {1}});
  const auto act = activity_levels(cs);
  EXPECT_EQ(act.at(1), 3.0);
  EXPECT_EQ(act.at(3), 1.0);

  // Path 0-1-2-3. User 2 is a target of seeds {0,1} (one neighbor: 1/2) and
  // of seeds {3} (neighbor: 1). Mean 0.75.
  const SocialNetwork net = SocialNetwork::from_edges(4, std::vector<std::pair<UserId, UserId>>{{0, 1}, {1, 2}, {2, 3}});
  const std::vector<Episode> eps{{"a", {0, 1}, {2}}, {"b", {3}, {2, 0}}};
  const auto frac = seed_neighbor_fractions(net, eps);
  EXPECT_DOUBLE_EQ(frac.at(2), 0.75);
  EXPECT_EQ(frac.at(0), 0.0);
  EXPECT_FALSE(frac.contains(1));
}

TEST(Evaluate, ReportStructure) {
  const SocialNetwork net = generate_ba({80, 2, 1});
  IcParams ic;
  ic.length = 8;
  ic.cascades = 40;
  ic.p = 0.3;
  const auto cascades = simulate_ic(net, ic).cascades;
  const std::vector<Cascade> train(cascades.begin(), cascades.begin() + 20);
  const std::vector<Cascade> test(cascades.begin() + 20, cascades.end());
  const std::vector<double> pcts{0.1, 0.3};
  const std::vector<std::size_t> ks{10, 50};
  const EvalReport r = evaluate(degree_scorer(net), net, test, train, pcts, ks);
  ASSERT_EQ(r.by_pct.size(), 2u);
  EXPECT_EQ(r.by_pct[0].episodes, test.size());
  EXPECT_GE(r.by_pct[0].recall.at(50), r.by_pct[0].recall.at(10));
  EXPECT_TRUE(r.activity.has_value());
  const auto j = r.to_json();
  EXPECT_TRUE(j.at("by_seed_pct")[0].contains("map@10"));
  EXPECT_TRUE(j.at("by_seed_pct")[1].contains("recall@50"));
  EXPECT_TRUE(j.contains("target_recall@100"));
  EXPECT_TRUE(j.contains("quartiles"));
  // Same inputs, same report.
  EXPECT_EQ(evaluate(degree_scorer(net), net, test, train, pcts, ks).to_json(), j);
}

}  // namespace
}  // namespace hivae
