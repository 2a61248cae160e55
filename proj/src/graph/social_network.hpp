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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "numeric/sparse.hpp"

namespace hivae {

using UserId = std::uint32_t;

// Dense index assignment for external user ids, in first-seen order.
class Vocabulary {
 public:
  UserId intern(std::string_view id);
  std::optional<UserId> find(std::string_view id) const;
  const std::string& id(UserId index) const { return ids_.at(index); }
  std::size_t size() const { return ids_.size(); }

  // vocab.tsv: one `id<TAB>index` line per user, ordered by index.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, UserId> index_;
};

// Undirected, unweighted, self-loop-free social graph.
class SocialNetwork {
 public:
  SocialNetwork() = default;

  // Deduplicates, symmetrizes and drops self-loops. Endpoints must be < n.
  static SocialNetwork from_edges(std::size_t n, std::span<const std::pair<UserId, UserId>> edges);

  std::size_t num_users() const { return num_users_; }
  // Undirected edge count; each pair is stored once with first < second.
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<std::pair<UserId, UserId>>& edges() const { return edges_; }
  const SparseMatrix& adjacency() const { return adjacency_; }

  std::size_t degree(UserId u) const;
  std::span<const UserId> neighbors(UserId u) const;
  bool has_edge(UserId u, UserId v) const;

 private:
  std::size_t num_users_ = 0;
  std::vector<std::pair<UserId, UserId>> edges_;
  SparseMatrix adjacency_;
};

// String-id edge list; unknown ids are interned unless `allow_new_ids` is
// false, in which case they raise an IoError naming the edge.
SocialNetwork build_network(std::span<const std::pair<std::string, std::string>> edge_list,
                            Vocabulary& vocab, bool allow_new_ids = true);

// `src<TAB>dst` per line; blank and `#` lines skipped.
SocialNetwork load_edge_file(const std::filesystem::path& path, Vocabulary& vocab,
                             bool allow_new_ids = true);
void save_edge_file(const SocialNetwork& net, const Vocabulary& vocab, const std::filesystem::path& path);

struct NormalizedView {
  // D^-1/2 A D^-1/2; rows and columns of isolated users are zero.
  SparseMatrix laplacian;
  // laplacian + I
  SparseMatrix a_hat;
};

NormalizedView normalized_laplacian(const SocialNetwork& net);
// Row i of the normalized matrix, densified.
std::vector<double> neighborhood_row(const NormalizedView& view, std::size_t i);

}  // namespace hivae
