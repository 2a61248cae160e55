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

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "cascade/cascade_store.hpp"
#include "eval/metrics.hpp"
#include "json.hpp"
#include "train/model.hpp"

namespace hivae {

// Scores for every user given an episode's seeds.
using Scorer = std::function<std::vector<double>(const Episode&)>;

Scorer model_scorer(const Model& model);
// Network degree; ties fall back to the index rule.
Scorer degree_scorer(const SocialNetwork& net);
// Fresh uniform scores per episode, drawn from a stream keyed by the
// episode's position so results do not depend on threading.
Scorer random_scorer(std::size_t num_users, std::uint64_t seed);

// Ranks every episode, fanning out over `threads` workers; output order
// matches input order.
std::vector<RankResult> rank_episodes(const Scorer& scorer, std::span<const Episode> episodes,
                                      std::size_t threads = 1);

std::vector<Episode> slice_episodes(std::span<const Cascade> cascades, double seed_pct);

double validation_map(const Model& model, std::span<const Episode> episodes, std::size_t k = 10,
                      std::size_t threads = 1);

// Participating cascade count per user.
std::map<UserId, double> activity_levels(std::span<const Cascade> cascades);
// Per user, the mean over training episodes where the user is a target of
// the fraction of seeds adjacent to that user.
std::map<UserId, double> seed_neighbor_fractions(const SocialNetwork& net, std::span<const Episode> episodes);

struct SeedPctResult {
  double seed_pct = 0.0;
  std::map<std::size_t, double> map;
  std::map<std::size_t, double> recall;
  std::size_t episodes = 0;
  std::size_t skipped = 0;
};

struct EvalReport {
  std::vector<SeedPctResult> by_pct;
  // Per-user target recall@100, pooled over every seed percentage.
  double mean_target_recall = 0.0;
  std::size_t target_users = 0;
  std::optional<QuartileReport> activity;
  std::optional<QuartileReport> seed_neighbor;
  std::string quartile_note;

  nlohmann::json to_json() const;
};

// `train` (may be empty) supplies the quartile grouping statistics.
EvalReport evaluate(const Scorer& scorer, const SocialNetwork& net, std::span<const Cascade> test,
                    std::span<const Cascade> train, std::span<const double> seed_pcts,
                    std::span<const std::size_t> ks, std::size_t threads = 1);

}  // namespace hivae
