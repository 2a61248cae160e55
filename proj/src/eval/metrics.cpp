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

#include "eval/metrics.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

#include "common/errors.hpp"

namespace hivae {

void sort_ranking(std::vector<ScoredUser>& candidates) {
  std::sort(candidates.begin(), candidates.end(), [](const ScoredUser& a, const ScoredUser& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.user < b.user;
  });
}

RankResult rank_by_scores(std::span<const double> scores, std::span<const UserId> seeds,
                          std::span<const UserId> targets) {
  std::vector<char> is_seed(scores.size(), 0);
  for (UserId s : seeds) {
    if (s >= scores.size()) throw ContractError("rank_by_scores: seed out of range");
    is_seed[s] = 1;
  }
  RankResult r;
  r.ranked.reserve(scores.size() - seeds.size());
  for (UserId u = 0; u < scores.size(); ++u)
    if (!is_seed[u]) r.ranked.push_back({u, scores[u]});
  sort_ranking(r.ranked);
  r.targets.assign(targets.begin(), targets.end());
  return r;
}

namespace {

std::unordered_set<UserId> target_set(const RankResult& rank) {
  return {rank.targets.begin(), rank.targets.end()};
}

}  // namespace

double average_precision_at_k(const RankResult& rank, std::size_t k) {
  if (k == 0) throw ContractError("average_precision_at_k: K must be >= 1");
  if (rank.targets.empty()) throw ContractError("average_precision_at_k: empty target set");
  const auto targets = target_set(rank);
  const std::size_t limit = std::min(k, rank.ranked.size());
  double sum_precision = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < limit; ++r) {
    if (targets.contains(rank.ranked[r].user)) {
      ++hits;
      sum_precision += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return sum_precision / static_cast<double>(std::min(targets.size(), k));
}

double recall_at_k(const RankResult& rank, std::size_t k) {
  if (k == 0) throw ContractError("recall_at_k: K must be >= 1");
  if (rank.targets.empty()) throw ContractError("recall_at_k: empty target set");
  const auto targets = target_set(rank);
  const std::size_t limit = std::min(k, rank.ranked.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < limit; ++r) hits += targets.contains(rank.ranked[r].user) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(targets.size());
}

namespace {

template <typename F>
MeanMetric mean_over(std::span<const RankResult> results, F metric) {
  MeanMetric m;
  double total = 0.0;
  for (const RankResult& r : results) {
    if (r.targets.empty()) {
      ++m.skipped;
      continue;
    }
    total += metric(r);
    ++m.episodes;
  }
  if (m.episodes) m.mean = total / static_cast<double>(m.episodes);
  return m;
}

}  // namespace

MeanMetric mean_average_precision(std::span<const RankResult> results, std::size_t k) {
  return mean_over(results, [k](const RankResult& r) { return average_precision_at_k(r, k); });
}

MeanMetric mean_recall(std::span<const RankResult> results, std::size_t k) {
  return mean_over(results, [k](const RankResult& r) { return recall_at_k(r, k); });
}

std::map<UserId, UserRecall> target_recall_per_user(std::span<const RankResult> results, std::size_t k) {
  std::map<UserId, UserRecall> out;
  for (const RankResult& r : results) {
    const std::size_t limit = std::min(k, r.ranked.size());
    std::unordered_set<UserId> top;
    for (std::size_t i = 0; i < limit; ++i) top.insert(r.ranked[i].user);
    for (UserId t : r.targets) {
      UserRecall& ur = out[t];
      ++ur.appearances;
      if (top.contains(t)) ++ur.hits;
    }
  }
  return out;
}

double mean_user_recall(const std::map<UserId, UserRecall>& per_user) {
  if (per_user.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [u, r] : per_user) total += r.value();
  return total / static_cast<double>(per_user.size());
}

QuartileReport quartile_report(const std::map<UserId, double>& metric, const std::map<UserId, double>& stat) {
  QuartileReport report;
  std::vector<std::pair<double, double>> rows;  // (stat, metric)
  for (const auto& [u, m] : metric) {
    auto it = stat.find(u);
    if (it == stat.end()) {
      ++report.excluded;
      continue;
    }
    rows.emplace_back(it->second, m);
  }
  if (rows.size() < 4) throw ContractError("quartile_report: need at least 4 users, got " + std::to_string(rows.size()));
  std::vector<double> sorted;
  sorted.reserve(rows.size());
  for (const auto& r : rows) sorted.push_back(r.first);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // Threshold q is the statistic at sorted position ceil(q * n / 4) - 1.
  std::array<double, 3> cut{};
  for (std::size_t q = 1; q <= 3; ++q) cut[q - 1] = sorted[(q * n + 3) / 4 - 1];
  std::array<double, 4> totals{};
  for (auto& g : report.groups) {
    g.stat_min = std::numeric_limits<double>::infinity();
    g.stat_max = -std::numeric_limits<double>::infinity();
  }
  for (const auto& [s, m] : rows) {
    std::size_t q = 0;
    while (q < 3 && s > cut[q]) ++q;
    QuartileGroup& g = report.groups[q];
    ++g.users;
    totals[q] += m;
    g.stat_min = std::min(g.stat_min, s);
    g.stat_max = std::max(g.stat_max, s);
  }
  for (std::size_t q = 0; q < 4; ++q) {
    QuartileGroup& g = report.groups[q];
    if (g.users) {
      g.mean_metric = totals[q] / static_cast<double>(g.users);
    } else {
      g.stat_min = g.stat_max = 0.0;
    }
  }
  return report;
}

}  // namespace hivae
