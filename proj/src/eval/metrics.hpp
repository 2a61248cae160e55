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

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "graph/social_network.hpp"

namespace hivae {

struct ScoredUser {
  UserId user;
  double score;
};

// Candidates ranked by descending score (ties: ascending user index), with
// the ground-truth targets of the episode.
struct RankResult {
  std::string cascade_id;
  double seed_pct = 0.0;
  std::vector<ScoredUser> ranked;
  std::vector<UserId> targets;
};

// Sorts `candidates` into the canonical order.
void sort_ranking(std::vector<ScoredUser>& candidates);

// Ranks every user outside `seeds` by `scores` (indexed by user).
RankResult rank_by_scores(std::span<const double> scores, std::span<const UserId> seeds,
                          std::span<const UserId> targets);

// Sum of precision@r over hit ranks r <= K, divided by min(|C|, K).
double average_precision_at_k(const RankResult& rank, std::size_t k);
// |top-K intersect C| / |C|
double recall_at_k(const RankResult& rank, std::size_t k);

struct MeanMetric {
  double mean = 0.0;
  std::size_t episodes = 0;
  // Episodes without targets, excluded from the mean.
  std::size_t skipped = 0;
};

MeanMetric mean_average_precision(std::span<const RankResult> results, std::size_t k);
MeanMetric mean_recall(std::span<const RankResult> results, std::size_t k);

struct UserRecall {
  std::size_t hits = 0;
  std::size_t appearances = 0;
  double value() const { return appearances ? static_cast<double>(hits) / static_cast<double>(appearances) : 0.0; }
};

// For every user that is a target at least once: how often it was ranked in
// the top K across those appearances.
std::map<UserId, UserRecall> target_recall_per_user(std::span<const RankResult> results, std::size_t k = 100);
// Mean over users of their per-user value (not pooled hits / appearances).
double mean_user_recall(const std::map<UserId, UserRecall>& per_user);

struct QuartileGroup {
  std::size_t users = 0;
  double mean_metric = 0.0;
  double stat_min = 0.0;
  double stat_max = 0.0;
};

struct QuartileReport {
  std::array<QuartileGroup, 4> groups;
  // Users with a metric value but no grouping statistic.
  std::size_t excluded = 0;
};

// Splits users at the 25/50/75th percentiles of `stat` (ties go to the lower
// quartile) and averages `metric` within each quartile. Needs >= 4 users
// with both values.
QuartileReport quartile_report(const std::map<UserId, double>& metric, const std::map<UserId, double>& stat);

}  // namespace hivae
