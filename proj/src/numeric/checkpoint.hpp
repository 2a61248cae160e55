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

#include <filesystem>

#include "numeric/param_store.hpp"

namespace hivae {

// Binary layout (little-endian):
//   "HIVAECK\0" | u32 version | u64 tensor count
//   per tensor: u32 name length | name bytes | u8 dtype (1 = f64)
//               | u32 ndim | u64 dims[ndim] | row-major data
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_tensors(const ParamStore& store, const std::filesystem::path& path);
// Tensors come back with zeroed gradients and optimizer state.
ParamStore load_tensors(const std::filesystem::path& path);

}  // namespace hivae
