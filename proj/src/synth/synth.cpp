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

#include "synth/synth.hpp"

#include <algorithm>
#include <unordered_set>

#include "common/errors.hpp"

namespace hivae {

SocialNetwork generate_ba(const BaParams& params) {
  const std::size_t n = params.n;
  const std::size_t m = params.m;
  if (m < 1 || m >= n) throw ConfigError("Barabasi-Albert needs 1 <= m < n");
  Rng rng(params.seed);
  std::vector<std::pair<UserId, UserId>> edges;
  // Each endpoint appears once per incident edge, so a uniform pick from
  // this list is a degree-proportional pick.
  std::vector<UserId> endpoints;
  for (UserId i = 0; i < m; ++i) {
    for (UserId j = i + 1; j < m; ++j) {
      edges.emplace_back(i, j);
      endpoints.push_back(i);
      endpoints.push_back(j);
    }
  }
  for (UserId v = static_cast<UserId>(m); v < n; ++v) {
    std::vector<UserId> chosen;
    while (chosen.size() < m) {
      const UserId u = endpoints.empty() ? static_cast<UserId>(rng.index(v))
                                         : endpoints[static_cast<std::size_t>(rng.index(endpoints.size()))];
      if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) chosen.push_back(u);
    }
    for (UserId u : chosen) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  return SocialNetwork::from_edges(n, edges);
}

std::vector<UserId> simulate_ic_once(const SocialNetwork& net, UserId seed_user, double p, Rng& rng) {
  if (seed_user >= net.num_users()) throw ContractError("simulate_ic_once: seed out of range");
  std::vector<char> active(net.num_users(), 0);
  std::vector<UserId> order{seed_user};
  active[seed_user] = 1;
  std::size_t round_begin = 0;
  while (round_begin < order.size()) {
    const std::size_t round_end = order.size();
    for (std::size_t i = round_begin; i < round_end; ++i) {
      for (UserId v : net.neighbors(order[i])) {
        if (active[v]) continue;
        if (rng.bernoulli(p)) {
          active[v] = 1;
          order.push_back(v);
        }
      }
    }
    round_begin = round_end;
  }
  return order;
}

IcResult simulate_ic(const SocialNetwork& net, const IcParams& params) {
  if (net.num_users() == 0) throw ContractError("simulate_ic: empty network");
  if (!(params.p >= 0.0 && params.p <= 1.0)) throw ConfigError("IC activation probability must be in [0, 1]");
  if (params.length < 2) throw ConfigError("target cascade length must be >= 2");
  const double lo = 0.8 * static_cast<double>(params.length);
  const double hi = 1.2 * static_cast<double>(params.length);
  IcResult result;
  Rng master(params.seed);
  for (std::size_t c = 0; c < params.cascades; ++c) {
    Rng rng = master.substream(c);
    std::vector<UserId> longer;
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < params.max_attempts && !accepted; ++attempt) {
      const auto seed_user = static_cast<UserId>(rng.index(net.num_users()));
      std::vector<UserId> run = simulate_ic_once(net, seed_user, params.p, rng);
      const auto len = static_cast<double>(run.size());
      if (len >= lo && len <= hi && run.size() >= 2) {
        result.cascades.push_back({"c" + std::to_string(c), std::move(run)});
        accepted = true;
      } else if (len > hi && longer.empty()) {
        longer = std::move(run);
      }
    }
    if (accepted) continue;
    if (!longer.empty()) {
      longer.resize(params.length);
      result.cascades.push_back({"c" + std::to_string(c), std::move(longer)});
      ++result.truncated;
    } else {
      ++result.rejected;
    }
  }
  return result;
}

void write_synthetic(const SocialNetwork& net, const std::vector<Cascade>& cascades,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Vocabulary vocab;
  for (UserId u = 0; u < net.num_users(); ++u) vocab.intern("u" + std::to_string(u));
  save_edge_file(net, vocab, dir / "edges.tsv");
  save_cascades(cascades, vocab, dir / "cascades.tsv");
}

}  // namespace hivae
