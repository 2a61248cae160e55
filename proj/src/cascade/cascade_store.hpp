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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graph/social_network.hpp"
#include "numeric/rng.hpp"

namespace hivae {

// Ordered activations of distinct users; user k (0-based) activated at
// step k + 1.
struct Cascade {
  std::string id;
  std::vector<UserId> users;

  std::size_t length() const { return users.size(); }
};

// Observed seed prefix and the users it went on to influence. Seed k
// (0-based) sits at position k + 1.
struct Episode {
  std::string cascade_id;
  std::vector<UserId> seeds;
  std::vector<UserId> targets;
};

struct CascadeLoadReport {
  std::size_t unknown_users = 0;
  std::size_t duplicate_users = 0;
  std::size_t skipped_short = 0;
};

// `cascade_id<TAB>u1[:t1] u2[:t2] ...`. When every activation carries a
// timestamp the users are stably sorted by it; timestamps are then dropped.
std::vector<Cascade> load_cascades(const std::filesystem::path& path, const Vocabulary& vocab,
                                   CascadeLoadReport* report = nullptr);
void save_cascades(std::span<const Cascade> cascades, const Vocabulary& vocab,
                   const std::filesystem::path& path);

// One episode per split point k = 2..K-1. With `max_per_cascade` > 0 and
// more split points than that, a uniform subset (kept in k order) is drawn
// from `rng`.
std::vector<Episode> make_episodes(const Cascade& c, std::size_t max_per_cascade = 0, Rng* rng = nullptr);
std::vector<Episode> make_episodes(std::span<const Cascade> cascades, std::size_t max_per_cascade = 0,
                                   Rng* rng = nullptr);

struct DatasetSplit {
  std::vector<Cascade> train;
  std::vector<Cascade> val;
  std::vector<Cascade> test;
};

DatasetSplit split_dataset(std::vector<Cascade> cascades, std::array<double, 3> fractions,
                           std::uint64_t seed);

// Seed prefix of max(1, floor(pct * K)) users; nullopt when nothing would be
// left to predict.
std::optional<Episode> seed_slice(const Cascade& c, double seed_pct);

std::size_t seed_count(std::size_t cascade_length, double seed_pct);

}  // namespace hivae
