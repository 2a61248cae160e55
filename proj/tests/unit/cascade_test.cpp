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

#include <algorithm>
#include <numeric>
#include <set>

#include "cascade/cascade_store.hpp"
#include "common/errors.hpp"
#include "test_util.hpp"

namespace hivae {
namespace {

Cascade make_cascade(std::size_t k, UserId offset = 0) {
  Cascade c;
  c.id = "c" + std::to_string(k);
  for (std::size_t i = 0; i < k; ++i) c.users.push_back(offset + static_cast<UserId>(i));
  return c;
}

TEST(LoadCascades, FormatDuplicatesAndUnknownUsers) {
  testing::TempDir dir("casc");
  const Vocabulary vocab = testing::numbered_vocab(5);
  testing::write_file(dir / "c.tsv", "c1\tu1 u2 u3\nc2\tu1 u2 u1\nc3\tu1 uX u2\n# note\n\n");
  CascadeLoadReport report;
  const auto cascades = load_cascades(dir / "c.tsv", vocab, &report);
  ASSERT_EQ(cascades.size(), 3u);
  EXPECT_EQ(cascades[0].id, "c1");
  EXPECT_EQ(cascades[0].users, (std::vector<UserId>{1, 2, 3}));
  EXPECT_EQ(cascades[1].users, (std::vector<UserId>{1, 2}));
  EXPECT_EQ(cascades[2].users, (std::vector<UserId>{1, 2}));
  EXPECT_EQ(report.duplicate_users, 1u);
  EXPECT_EQ(report.unknown_users, 1u);
}

TEST(LoadCascades, TimestampsOrderActivations) {
  testing::TempDir dir("casc_ts");
  const Vocabulary vocab = testing::numbered_vocab(4);
  testing::write_file(dir / "c.tsv", "c1\tu3:30 u1:10 u2:20\n");
  const auto cascades = load_cascades(dir / "c.tsv", vocab);
  ASSERT_EQ(cascades.size(), 1u);
  EXPECT_EQ(cascades[0].users, (std::vector<UserId>{1, 2, 3}));
}

TEST(LoadCascades, RoundTrip) {
  testing::TempDir dir("casc_rt");
  const Vocabulary vocab = testing::numbered_vocab(6);
  std::vector<Cascade> cs{make_cascade(4), make_cascade(3, 2)};
  save_cascades(cs, vocab, dir / "c.tsv");
  const auto back = load_cascades(dir / "c.tsv", vocab);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].users, cs[0].users);
  EXPECT_EQ(back[1].users, cs[1].users);
  EXPECT_EQ(back[1].id, cs[1].id);
}

TEST(LoadCascades, MissingFile) {
  const Vocabulary vocab = testing::numbered_vocab(2);
  EXPECT_THROW(load_cascades("/nonexistent/c.tsv", vocab), IoError);
}

TEST(MakeEpisodes, FourActivations) {
  const auto eps = make_episodes(make_cascade(4));
  ASSERT_EQ(eps.size(), 2u);
  EXPECT_EQ(eps[0].seeds, (std::vector<UserId>{0, 1}));
  EXPECT_EQ(eps[0].targets, (std::vector<UserId>{2, 3}));
  EXPECT_EQ(eps[1].seeds, (std::vector<UserId>{0, 1, 2}));
  EXPECT_EQ(eps[1].targets, (std::vector<UserId>{3}));
}

TEST(MakeEpisodes, Boundaries) {
  EXPECT_EQ(make_episodes(make_cascade(3)).size(), 1u);
  EXPECT_TRUE(make_episodes(make_cascade(2)).empty());
  EXPECT_TRUE(make_episodes(make_cascade(1)).empty());
}

TEST(MakeEpisodes, CountAndSizeIdentitiesOnRandomCascades) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 3 + rng.index(40);
    const Cascade c = make_cascade(k, static_cast<UserId>(rng.index(100)));
    const auto eps = make_episodes(c);
    ASSERT_EQ(eps.size(), k - 2);
    std::size_t total = 0;
    for (const Episode& e : eps) {
      total += e.seeds.size() + e.targets.size();
      ASSERT_TRUE(std::equal(e.seeds.begin(), e.seeds.end(), c.users.begin()));
      std::set<UserId> s(e.seeds.begin(), e.seeds.end());
      for (UserId t : e.targets) ASSERT_FALSE(s.contains(t));
      ASSERT_GE(e.seeds.size(), 1u);
      ASSERT_GE(e.targets.size(), 1u);
    }
    EXPECT_EQ(total, (k - 2) * k);
  }
}

TEST(MakeEpisodes, CapSubsamplesInOrder) {
  Rng rng(3);
  const auto eps = make_episodes(make_cascade(30), 5, &rng);
  ASSERT_EQ(eps.size(), 5u);
  for (std::size_t i = 1; i < eps.size(); ++i) EXPECT_LT(eps[i - 1].seeds.size(), eps[i].seeds.size());
  // A cap larger than the split count keeps every episode.
  EXPECT_EQ(make_episodes(make_cascade(6), 10, &rng).size(), 4u);
}

TEST(SplitDataset, SizesDeterminismAndPartition) {
  std::vector<Cascade> cs;
  for (std::size_t i = 0; i < 10; ++i) {
    cs.push_back(make_cascade(3));
    cs.back().id = "c" + std::to_string(i);
  }
  const auto a = split_dataset(cs, {0.7, 0.1, 0.2}, 5);
  EXPECT_EQ(a.train.size(), 7u);
  EXPECT_EQ(a.val.size(), 1u);
  EXPECT_EQ(a.test.size(), 2u);

  auto ids = [](const std::vector<Cascade>& v) {
    std::vector<std::string> out;
    for (const auto& c : v) out.push_back(c.id);
    return out;
  };
  const auto b = split_dataset(cs, {0.7, 0.1, 0.2}, 5);
  EXPECT_EQ(ids(a.train), ids(b.train));
  EXPECT_EQ(ids(a.test), ids(b.test));

  std::set<std::string> all;
  for (const auto* part : {&a.train, &a.val, &a.test})
    for (const auto& c : *part) EXPECT_TRUE(all.insert(c.id).second);
  EXPECT_EQ(all.size(), 10u);

  std::vector<Cascade> many;
  for (std::size_t i = 0; i < 40; ++i) {
    many.push_back(make_cascade(3));
    many.back().id = "c" + std::to_string(i);
  }
  EXPECT_NE(ids(split_dataset(many, {0.7, 0.1, 0.2}, 5).train), ids(split_dataset(many, {0.7, 0.1, 0.2}, 6).train));
}

TEST(SeedSlice, Arithmetic) {
  const auto e1 = seed_slice(make_cascade(10), 0.3);
  ASSERT_TRUE(e1);
  EXPECT_EQ(e1->seeds.size(), 3u);
  EXPECT_EQ(e1->targets.size(), 7u);

  const auto e2 = seed_slice(make_cascade(10), 0.5);
  ASSERT_TRUE(e2);
  EXPECT_EQ(e2->seeds.size(), 5u);
  EXPECT_EQ(e2->targets.size(), 5u);

  const auto e3 = seed_slice(make_cascade(3), 0.1);
  ASSERT_TRUE(e3);
  EXPECT_EQ(e3->seeds.size(), 1u);
  EXPECT_EQ(e3->targets.size(), 2u);

  EXPECT_FALSE(seed_slice(make_cascade(1), 0.5));
}

TEST(SeedSlice, FloatingPointProducts) {
  // 0.3 * 10 and 0.7 * 10 are not exact in binary.
  EXPECT_EQ(seed_count(10, 0.3), 3u);
  EXPECT_EQ(seed_count(10, 0.7), 7u);
  EXPECT_EQ(seed_count(20, 0.1), 2u);
  EXPECT_EQ(seed_count(5, 0.1), 1u);
}

}  // namespace
}  // namespace hivae
