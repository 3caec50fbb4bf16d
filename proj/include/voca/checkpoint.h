// Copyright 2026 The VOCA-cpp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VOCA_CHECKPOINT_H_
#define VOCA_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voca/net.h"

namespace voca {

struct ManifestEntry {
  std::string name;
  std::vector<uint32_t> shape;
  uint64_t offset = 0;  // bytes from the start of the tensor data block
};

// "VCKP" container, little-endian:
//   magic, u32 version (1)
//   NetConfig: u32 window, feature_dim, n_subjects, depth, depth x channels,
//              fc1_units, latent, n_vertices; f64 bn_epsilon
//   u32 subject count, then length-prefixed subject ids (one-hot order)
//   u32 tensor count, then per tensor: name, u32 rank, rank x u32 dims,
//              u64 offset
//   f32 tensor data, concatenated in manifest order
std::vector<char> EncodeCheckpoint(const NetworkParams& params);
NetworkParams DecodeCheckpoint(const std::vector<char>& bytes);
void SaveCheckpoint(const NetworkParams& params,
                    const std::filesystem::path& path);
NetworkParams LoadCheckpoint(const std::filesystem::path& path);

std::vector<ManifestEntry> CheckpointManifest(const std::vector<char>& bytes);

}  // namespace voca

#endif  // VOCA_CHECKPOINT_H_
