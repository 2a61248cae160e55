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

#include "graph/social_network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "common/errors.hpp"

namespace hivae {

UserId Vocabulary::intern(std::string_view id) {
  if (auto it = index_.find(std::string(id)); it != index_.end()) return it->second;
  const auto idx = static_cast<UserId>(ids_.size());
  ids_.emplace_back(id);
  index_.emplace(ids_.back(), idx);
  return idx;
}

std::optional<UserId> Vocabulary::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary: " + path.string());
  for (std::size_t i = 0; i < ids_.size(); ++i) out << ids_[i] << '\t' << i << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary: " + path.string());
  Vocabulary vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected id<TAB>index");
    const std::string id = line.substr(0, tab);
    const auto index = std::stoul(line.substr(tab + 1));
    if (index != vocab.size() || vocab.find(id))
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": indices must be dense and unique");
    vocab.intern(id);
  }
  return vocab;
}

SocialNetwork SocialNetwork::from_edges(std::size_t n, std::span<const std::pair<UserId, UserId>> edges) {
  SocialNetwork net;
  net.num_users_ = n;
  for (auto [u, v] : edges) {
    if (u >= n || v >= n)
      throw ContractError("edge endpoint out of range: (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    if (u == v) continue;
    net.edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(net.edges_.begin(), net.edges_.end());
  net.edges_.erase(std::unique(net.edges_.begin(), net.edges_.end()), net.edges_.end());

  std::vector<Triplet> t;
  t.reserve(2 * net.edges_.size());
  for (auto [u, v] : net.edges_) {
    t.push_back({u, v, 1.0});
    t.push_back({v, u, 1.0});
  }
  net.adjacency_ = SparseMatrix::from_triplets(n, n, std::move(t));
  return net;
}

std::size_t SocialNetwork::degree(UserId u) const {
  if (u >= num_users_) throw ContractError("user index out of range");
  return adjacency_.row_ptr()[u + 1] - adjacency_.row_ptr()[u];
}

std::span<const UserId> SocialNetwork::neighbors(UserId u) const {
  if (u >= num_users_) throw ContractError("user index out of range");
  const auto& rp = adjacency_.row_ptr();
  return {adjacency_.col_idx().data() + rp[u], rp[u + 1] - rp[u]};
}

bool SocialNetwork::has_edge(UserId u, UserId v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

SocialNetwork build_network(std::span<const std::pair<std::string, std::string>> edge_list,
                            Vocabulary& vocab, bool allow_new_ids) {
  if (edge_list.empty()) throw IoError("edge list is empty");
  std::vector<std::pair<UserId, UserId>> edges;
  edges.reserve(edge_list.size());
  for (std::size_t k = 0; k < edge_list.size(); ++k) {
    const auto& [a, b] = edge_list[k];
    auto resolve = [&](const std::string& id) {
      if (allow_new_ids) return vocab.intern(id);
      auto idx = vocab.find(id);
      if (!idx) throw IoError("edge " + std::to_string(k + 1) + ": unknown user id '" + id + "'");
      return *idx;
    };
    const UserId u = resolve(a);
    const UserId v = resolve(b);
    edges.emplace_back(u, v);
  }
  return SocialNetwork::from_edges(vocab.size(), edges);
}

SocialNetwork load_edge_file(const std::filesystem::path& path, Vocabulary& vocab, bool allow_new_ids) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path.string());
  std::vector<std::pair<UserId, UserId>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw IoError(where + ": expected src<TAB>dst");
    const std::string a = line.substr(0, tab);
    const std::string b = line.substr(tab + 1);
    if (a.empty() || b.empty() || b.find('\t') != std::string::npos)
      throw IoError(where + ": expected src<TAB>dst");
    auto resolve = [&](const std::string& id) {
      if (allow_new_ids) return vocab.intern(id);
      auto idx = vocab.find(id);
      if (!idx) throw IoError(where + ": unknown user id '" + id + "'");
      return *idx;
    };
    const UserId u = resolve(a);
    const UserId v = resolve(b);
    edges.emplace_back(u, v);
  }
  if (edges.empty()) throw IoError("edge list is empty: " + path.string());
  return SocialNetwork::from_edges(vocab.size(), edges);
}

void save_edge_file(const SocialNetwork& net, const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write edge list: " + path.string());
  for (auto [u, v] : net.edges()) out << vocab.id(u) << '\t' << vocab.id(v) << '\n';
}

NormalizedView normalized_laplacian(const SocialNetwork& net) {
  const std::size_t n = net.num_users();
  std::vector<Triplet> lt;
  lt.reserve(2 * net.num_edges());
  for (auto [u, v] : net.edges()) {
    // Computed once per pair so both mirrored entries are bit-identical.
    const double w =
        1.0 / std::sqrt(static_cast<double>(net.degree(u)) * static_cast<double>(net.degree(v)));
    lt.push_back({u, v, w});
    lt.push_back({v, u, w});
  }
  std::vector<Triplet> at = lt;
  for (UserId u = 0; u < n; ++u) at.push_back({u, u, 1.0});
  return NormalizedView{SparseMatrix::from_triplets(n, n, std::move(lt)),
                        SparseMatrix::from_triplets(n, n, std::move(at))};
}

std::vector<double> neighborhood_row(const NormalizedView& view, std::size_t i) {
  if (i >= view.laplacian.rows()) throw ContractError("neighborhood_row: user index out of range");
  return view.laplacian.dense_row(i);
}

}  // namespace hivae
