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

#include "numeric/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace hivae {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian");

namespace {

constexpr char kMagic[8] = {'H', 'I', 'V', 'A', 'E', 'C', 'K', '\0'};
constexpr std::uint8_t kDtypeF64 = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated checkpoint: " + path.string());
  return v;
}

}  // namespace

void save_tensors(const ParamStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, store.size());
  for (const auto& p : store) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint8_t>(out, kDtypeF64);
    put<std::uint32_t>(out, 2);
    put<std::uint64_t>(out, p->value.rows());
    put<std::uint64_t>(out, p->value.cols());
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

ParamStore load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a checkpoint file: " + path.string());
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto count = get<std::uint64_t>(in, path);
  ParamStore store;
  for (std::uint64_t t = 0; t < count; ++t) {
    const auto len = get<std::uint32_t>(in, path);
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (get<std::uint8_t>(in, path) != kDtypeF64) throw IoError("unsupported dtype in " + name);
    const auto ndim = get<std::uint32_t>(in, path);
    if (ndim != 2) throw IoError("unsupported rank in " + name);
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw IoError("truncated tensor " + name + " in " + path.string());
    store.add(std::move(name), std::move(m));
  }
  return store;
}

}  // namespace hivae
