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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cascade/cascade_store.hpp"
#include "graph/social_network.hpp"
#include "numeric/rng.hpp"

namespace hivae {

struct BaParams {
  std::size_t n = 0;
  std::size_t m = 1;
  std::uint64_t seed = 0;
};

// Preferential attachment from a clique on the first m nodes. Every later
// node attaches to m distinct earlier nodes drawn proportionally to degree.
SocialNetwork generate_ba(const BaParams& params);

struct IcParams {
  double p = 0.1;
  std::size_t length = 20;
  std::size_t cascades = 100;
  std::uint64_t seed = 0;
  std::size_t max_attempts = 100;
};

// One synchronous Independent Cascade run from `seed_user`. Users appear in
// activation order: by round, then by the order of successful draws.
std::vector<UserId> simulate_ic_once(const SocialNetwork& net, UserId seed_user, double p, Rng& rng);

struct IcResult {
  std::vector<Cascade> cascades;
  std::size_t truncated = 0;
  // Cascades for which no attempt reached 0.8 * length.
  std::size_t rejected = 0;
};

// Cascade i uses substream i of the master seed, so results do not depend
// on how many cascades were requested.
IcResult simulate_ic(const SocialNetwork& net, const IcParams& params);

// Writes edges.tsv and cascades.tsv with user ids u<i> and cascade ids c<i>.
void write_synthetic(const SocialNetwork& net, const std::vector<Cascade>& cascades,
                     const std::filesystem::path& dir);

}  // namespace hivae
