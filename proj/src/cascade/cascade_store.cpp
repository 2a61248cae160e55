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

#include "cascade/cascade_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "common/errors.hpp"

namespace hivae {

namespace {

struct Token {
  std::string user;
  std::optional<double> time;
};

Token parse_token(const std::string& tok) {
  const auto colon = tok.rfind(':');
  if (colon != std::string::npos && colon + 1 < tok.size()) {
    double t = 0.0;
    const char* first = tok.data() + colon + 1;
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, t);
    if (ec == std::errc() && ptr == last) return {tok.substr(0, colon), t};
  }
  return {tok, std::nullopt};
}

}  // namespace

std::vector<Cascade> load_cascades(const std::filesystem::path& path, const Vocabulary& vocab,
                                   CascadeLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cascade file: " + path.string());
  CascadeLoadReport local;
  std::vector<Cascade> out;
  std::string line;
  std::size_t lineno = 0;
  bool any_line = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    any_line = true;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected cascade_id<TAB>users");
    Cascade c;
    c.id = line.substr(0, tab);
    std::istringstream users(line.substr(tab + 1));
    std::vector<Token> tokens;
    for (std::string tok; users >> tok;) tokens.push_back(parse_token(tok));
    const bool timed = !tokens.empty() &&
                       std::all_of(tokens.begin(), tokens.end(), [](const Token& t) { return t.time.has_value(); });
    if (timed) {
      std::stable_sort(tokens.begin(), tokens.end(),
                       [](const Token& a, const Token& b) { return *a.time < *b.time; });
    }
    std::unordered_set<UserId> seen;
    for (const Token& t : tokens) {
      auto idx = vocab.find(t.user);
      if (!idx) {
        ++local.unknown_users;
        continue;
      }
      if (!seen.insert(*idx).second) {
        ++local.duplicate_users;
        continue;
      }
      c.users.push_back(*idx);
    }
    if (c.users.size() < 2) {
      ++local.skipped_short;
      continue;
    }
    out.push_back(std::move(c));
  }
  if (!any_line) throw IoError("cascade file is empty: " + path.string());
  if (report) *report = local;
  return out;
}

void save_cascades(std::span<const Cascade> cascades, const Vocabulary& vocab,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write cascade file: " + path.string());
  for (const Cascade& c : cascades) {
    out << c.id << '\t';
    for (std::size_t k = 0; k < c.users.size(); ++k) out << (k ? " " : "") << vocab.id(c.users[k]);
    out << '\n';
  }
}

std::vector<Episode> make_episodes(const Cascade& c, std::size_t max_per_cascade, Rng* rng) {
  std::vector<Episode> out;
  const std::size_t K = c.length();
  if (K < 3) return out;
  std::vector<std::size_t> splits(K - 2);
  std::iota(splits.begin(), splits.end(), std::size_t{2});
  if (max_per_cascade > 0 && splits.size() > max_per_cascade) {
    if (rng == nullptr) throw ContractError("make_episodes: subsampling requires an rng");
    rng->shuffle(splits);
    splits.resize(max_per_cascade);
    std::sort(splits.begin(), splits.end());
  }
  out.reserve(splits.size());
  for (std::size_t k : splits) {
    Episode e;
    e.cascade_id = c.id;
    e.seeds.assign(c.users.begin(), c.users.begin() + static_cast<std::ptrdiff_t>(k));
    e.targets.assign(c.users.begin() + static_cast<std::ptrdiff_t>(k), c.users.end());
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Episode> make_episodes(std::span<const Cascade> cascades, std::size_t max_per_cascade, Rng* rng) {
  std::vector<Episode> out;
  for (const Cascade& c : cascades) {
    auto eps = make_episodes(c, max_per_cascade, rng);
    std::move(eps.begin(), eps.end(), std::back_inserter(out));
  }
  return out;
}

DatasetSplit split_dataset(std::vector<Cascade> cascades, std::array<double, 3> fractions,
                           std::uint64_t seed) {
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9 || std::any_of(fractions.begin(), fractions.end(), [](double f) { return f < 0; }))
    throw ConfigError("split fractions must be non-negative and sum to 1");
  const std::size_t n = cascades.size();
  if (n < 3) throw ContractError("split_dataset: need at least 3 cascades, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n))));
  DatasetSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    Cascade& c = cascades[order[i]];
    if (i < n_train)
      split.train.push_back(std::move(c));
    else if (i < n_train + n_val)
      split.val.push_back(std::move(c));
    else
      split.test.push_back(std::move(c));
  }
  return split;
}

std::size_t seed_count(std::size_t cascade_length, double seed_pct) {
  // 0.3 * 10 must give 3.
  const auto k = static_cast<std::size_t>(std::floor(seed_pct * static_cast<double>(cascade_length) + 1e-9));
  return std::max<std::size_t>(1, k);
}

std::optional<Episode> seed_slice(const Cascade& c, double seed_pct) {
  if (c.length() < 2) return std::nullopt;
  const std::size_t k = seed_count(c.length(), seed_pct);
  if (k >= c.length()) return std::nullopt;
  Episode e;
  e.cascade_id = c.id;
  e.seeds.assign(c.users.begin(), c.users.begin() + static_cast<std::ptrdiff_t>(k));
  e.targets.assign(c.users.begin() + static_cast<std::ptrdiff_t>(k), c.users.end());
  return e;
}

}  // namespace hivae
