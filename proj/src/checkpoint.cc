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

#include "voca/checkpoint.h"

#include <bit>
#include <string>

#include "voca/binary_io.h"
#include "voca/error.h"

namespace voca {
namespace {

constexpr uint32_t kCheckpointVersion = 1;

struct Header {
  NetConfig config;
  std::vector<std::string> subjects;
  std::vector<ManifestEntry> manifest;
  size_t data_start = 0;
};

Header ReadHeader(ByteReader& in) {
  in.ExpectMagic("VCKP");
  uint32_t version = in.U32();
  Require(version == kCheckpointVersion, ErrorCode::kFormat,
          "checkpoint version " + std::to_string(version));
  Header h;
  NetConfig& c = h.config;
  c.window = static_cast<int>(in.U32());
  c.feature_dim = static_cast<int>(in.U32());
  c.n_subjects = static_cast<int>(in.U32());
  uint32_t depth = in.U32();
  Require(depth >= 1 && depth <= 64, ErrorCode::kFormat,
          "checkpoint conv depth out of range");
  c.conv_channels.resize(depth);
  for (auto& ch : c.conv_channels) ch = static_cast<int>(in.U32());
  c.fc1_units = static_cast<int>(in.U32());
  c.latent = static_cast<int>(in.U32());
  c.n_vertices = static_cast<int>(in.U32());
  c.bn_epsilon = std::bit_cast<double>(in.U64());
  try {
    c.Validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kFormat, std::string("checkpoint config: ") + e.what());
  }
  uint32_t n_subjects = in.U32();
  Require(n_subjects == 0 || n_subjects == static_cast<uint32_t>(c.n_subjects),
          ErrorCode::kFormat, "checkpoint subject list size mismatch");
  for (uint32_t i = 0; i < n_subjects; ++i) h.subjects.push_back(in.String());
  uint32_t n_tensors = in.U32();
  Require(n_tensors < 4096, ErrorCode::kFormat, "checkpoint manifest too big");
  for (uint32_t i = 0; i < n_tensors; ++i) {
    ManifestEntry e;
    e.name = in.String();
    uint32_t rank = in.U32();
    Require(rank <= 8, ErrorCode::kFormat, "tensor rank out of range");
    e.shape.resize(rank);
    for (auto& d : e.shape) d = in.U32();
    e.offset = in.U64();
    h.manifest.push_back(std::move(e));
  }
  h.data_start = in.position();
  return h;
}

uint64_t Elements(const std::vector<uint32_t>& shape) {
  uint64_t n = 1;
  for (uint32_t d : shape) n *= d;
  return n;
}

}  // namespace

std::vector<char> EncodeCheckpoint(const NetworkParams& params) {
  const NetConfig& c = params.config;
  c.Validate();
  ByteWriter out;
  out.Magic("VCKP");
  out.U32(kCheckpointVersion);
  out.U32(static_cast<uint32_t>(c.window));
  out.U32(static_cast<uint32_t>(c.feature_dim));
  out.U32(static_cast<uint32_t>(c.n_subjects));
  out.U32(static_cast<uint32_t>(c.depth()));
  for (int ch : c.conv_channels) out.U32(static_cast<uint32_t>(ch));
  out.U32(static_cast<uint32_t>(c.fc1_units));
  out.U32(static_cast<uint32_t>(c.latent));
  out.U32(static_cast<uint32_t>(c.n_vertices));
  out.U64(std::bit_cast<uint64_t>(c.bn_epsilon));
  out.U32(static_cast<uint32_t>(params.subjects.size()));
  for (const auto& s : params.subjects) out.String(s);

  std::vector<ManifestEntry> manifest;
  ByteWriter data;
  ForEachTensor(params, [&](const std::string& name, const auto& tensor,
                            const std::vector<uint32_t>& shape, TensorRole) {
    Require(static_cast<uint64_t>(tensor.size()) == Elements(shape),
            ErrorCode::kParameter, "tensor " + name + " has wrong size");
    manifest.push_back({name, shape, data.size()});
    data.F32s(std::span<const float>(tensor.data(), tensor.size()));
  });
  out.U32(static_cast<uint32_t>(manifest.size()));
  for (const auto& e : manifest) {
    out.String(e.name);
    out.U32(static_cast<uint32_t>(e.shape.size()));
    for (uint32_t d : e.shape) out.U32(d);
    out.U64(e.offset);
  }
  out.Bytes(data.buffer().data(), data.size());
  return out.buffer();
}

std::vector<ManifestEntry> CheckpointManifest(const std::vector<char>& bytes) {
  ByteReader in(bytes, "checkpoint");
  return ReadHeader(in).manifest;
}

NetworkParams DecodeCheckpoint(const std::vector<char>& bytes) {
  ByteReader in(bytes, "checkpoint");
  Header h = ReadHeader(in);
  // Everything is decoded into a fresh object; on any error nothing escapes.
  NetworkParams params = NetworkParams::Zeros(h.config);
  params.subjects = h.subjects;
  size_t index = 0;
  uint64_t expected_offset = 0;
  ForEachTensor(params, [&](const std::string& name, auto& tensor,
                            const std::vector<uint32_t>& shape, TensorRole) {
    Require(index < h.manifest.size(), ErrorCode::kFormat,
            "checkpoint is missing tensor " + name);
    const ManifestEntry& e = h.manifest[index++];
    Require(e.name == name && e.shape == shape, ErrorCode::kFormat,
            "checkpoint tensor " + e.name + " does not match expected " +
                name);
    Require(e.offset == expected_offset, ErrorCode::kFormat,
            "checkpoint tensor " + name + " has unexpected offset");
    in.Seek(h.data_start + e.offset);
    in.F32s(std::span<float>(tensor.data(), tensor.size()));
    expected_offset += 4 * Elements(shape);
  });
  Require(index == h.manifest.size(), ErrorCode::kFormat,
          "checkpoint has unexpected extra tensors");
  Require(in.AtEnd(), ErrorCode::kFormat, "checkpoint has trailing bytes");
  return params;
}

void SaveCheckpoint(const NetworkParams& params,
                    const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeCheckpoint(params));
}

NetworkParams LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(ReadFileBytes(path));
}

}  // namespace voca
