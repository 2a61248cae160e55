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

#include "train/evaluate.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <unordered_set>

#include "common/errors.hpp"

namespace hivae {

Scorer model_scorer(const Model& model) {
  return [&model](const Episode& ep) { return model.diffusion().scores(model.params(), ep.seeds); };
}

Scorer degree_scorer(const SocialNetwork& net) {
  std::vector<double> deg(net.num_users());
  for (UserId u = 0; u < net.num_users(); ++u) deg[u] = static_cast<double>(net.degree(u));
  return [deg = std::move(deg)](const Episode&) { return deg; };
}

Scorer random_scorer(std::size_t num_users, std::uint64_t seed) {
  return [num_users, seed](const Episode& ep) {
    // Keyed by the episode contents rather than call order.
    std::uint64_t key = splitmix64(seed);
    for (char c : ep.cascade_id) key = splitmix64(key ^ static_cast<unsigned char>(c));
    key = splitmix64(key ^ ep.seeds.size());
    Rng rng(key);
    std::vector<double> s(num_users);
    for (double& x : s) x = rng.uniform();
    return s;
  };
}

std::vector<RankResult> rank_episodes(const Scorer& scorer, std::span<const Episode> episodes,
                                      std::size_t threads) {
  std::vector<RankResult> out(episodes.size());
  auto work = [&](std::size_t i) {
    const Episode& ep = episodes[i];
    const std::vector<double> s = scorer(ep);
    out[i] = rank_by_scores(s, ep.seeds, ep.targets);
    out[i].cascade_id = ep.cascade_id;
  };
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(episodes.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < episodes.size(); ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < episodes.size(); i = next++) work(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<Episode> slice_episodes(std::span<const Cascade> cascades, double seed_pct) {
  std::vector<Episode> out;
  for (const Cascade& c : cascades)
    if (auto ep = seed_slice(c, seed_pct)) out.push_back(std::move(*ep));
  return out;
}

double validation_map(const Model& model, std::span<const Episode> episodes, std::size_t k, std::size_t threads) {
  const auto ranks = rank_episodes(model_scorer(model), episodes, threads);
  return mean_average_precision(ranks, k).mean;
}

std::map<UserId, double> activity_levels(std::span<const Cascade> cascades) {
  std::map<UserId, double> out;
  for (const Cascade& c : cascades)
    for (UserId u : c.users) out[u] += 1.0;
  return out;
}

std::map<UserId, double> seed_neighbor_fractions(const SocialNetwork& net, std::span<const Episode> episodes) {
  std::map<UserId, std::pair<double, std::size_t>> acc;
  for (const Episode& ep : episodes) {
    if (ep.seeds.empty()) continue;
    for (UserId t : ep.targets) {
      std::size_t adjacent = 0;
      for (UserId s : ep.seeds) adjacent += net.has_edge(t, s) ? 1 : 0;
      auto& [total, count] = acc[t];
      total += static_cast<double>(adjacent) / static_cast<double>(ep.seeds.size());
      ++count;
    }
  }
  std::map<UserId, double> out;
  for (const auto& [u, tc] : acc) out[u] = tc.first / static_cast<double>(tc.second);
  return out;
}

EvalReport evaluate(const Scorer& scorer, const SocialNetwork& net, std::span<const Cascade> test,
                    std::span<const Cascade> train, std::span<const double> seed_pcts,
                    std::span<const std::size_t> ks, std::size_t threads) {
  EvalReport report;
  std::vector<RankResult> pooled;
  for (double pct : seed_pcts) {
    std::vector<Episode> episodes;
    SeedPctResult row;
    row.seed_pct = pct;
    for (const Cascade& c : test) {
      if (auto ep = seed_slice(c, pct)) {
        episodes.push_back(std::move(*ep));
      } else {
        ++row.skipped;
      }
    }
    std::vector<RankResult> ranks = rank_episodes(scorer, episodes, threads);
    for (RankResult& r : ranks) r.seed_pct = pct;
    for (std::size_t k : ks) {
      const MeanMetric m = mean_average_precision(ranks, k);
      row.map[k] = m.mean;
      row.recall[k] = mean_recall(ranks, k).mean;
      row.episodes = m.episodes;
    }
    report.by_pct.push_back(std::move(row));
    pooled.insert(pooled.end(), std::make_move_iterator(ranks.begin()), std::make_move_iterator(ranks.end()));
  }
  const auto per_user = target_recall_per_user(pooled, 100);
  report.mean_target_recall = mean_user_recall(per_user);
  report.target_users = per_user.size();
  std::map<UserId, double> metric;
  for (const auto& [u, r] : per_user) metric[u] = r.value();
  if (train.empty()) {
    report.quartile_note = "no training cascades supplied";
    return report;
  }
  const std::vector<Episode> train_episodes = make_episodes(train);
  try {
    report.activity = quartile_report(metric, activity_levels(train));
    report.seed_neighbor = quartile_report(metric, seed_neighbor_fractions(net, train_episodes));
  } catch (const ContractError& e) {
    report.quartile_note = e.what();
  }
  return report;
}

namespace {

nlohmann::json quartile_json(const QuartileReport& q) {
  nlohmann::json groups = nlohmann::json::array();
  for (std::size_t i = 0; i < 4; ++i) {
    const QuartileGroup& g = q.groups[i];
    groups.push_back({{"quartile", i + 1},
                      {"users", g.users},
                      {"mean_target_recall", g.mean_metric},
                      {"stat_min", g.stat_min},
                      {"stat_max", g.stat_max}});
  }
  return {{"groups", groups}, {"excluded_users", q.excluded}};
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["by_seed_pct"] = nlohmann::json::array();
  for (const SeedPctResult& r : by_pct) {
    nlohmann::json row{{"seed_pct", r.seed_pct}, {"episodes", r.episodes}, {"skipped", r.skipped}};
    for (const auto& [k, v] : r.map) row["map@" + std::to_string(k)] = v;
    for (const auto& [k, v] : r.recall) row["recall@" + std::to_string(k)] = v;
    j["by_seed_pct"].push_back(row);
  }
  j["target_recall@100"] = {{"mean_over_users", mean_target_recall}, {"users", target_users}};
  if (activity) j["quartiles"]["activity_level"] = quartile_json(*activity);
  if (seed_neighbor) j["quartiles"]["seed_neighbor_fraction"] = quartile_json(*seed_neighbor);
  if (!quartile_note.empty()) j["quartile_note"] = quartile_note;
  return j;
}

}  // namespace hivae
