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

#ifndef VOCA_MESH_IO_H_
#define VOCA_MESH_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace voca {

// N x 3 vertex positions in meters.
using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Face = std::array<uint32_t, 3>;

struct Mesh {
  Vertices vertices;
  std::vector<Face> faces;
};

// Frames sharing one topology (the topology itself lives with the template).
struct MeshSequence {
  std::vector<Vertices> frames;
  double fps = 60.0;

  int size() const { return static_cast<int>(frames.size()); }
};

// ASCII OBJ: "v x y z" lines then "f a b c" with 1-based indices. Vertices are
// printed with 9 significant digits, which reproduces 32-bit values.
void WriteObj(const std::filesystem::path& path, const Vertices& vertices,
              const std::vector<Face>& faces);
Mesh ReadObj(const std::filesystem::path& path);

// Binary little-endian PLY with float32 x/y/z and uchar/int face lists.
void WritePly(const std::filesystem::path& path, const Vertices& vertices,
              const std::vector<Face>& faces);
Mesh ReadPly(const std::filesystem::path& path);

// Dispatches on the extension (.obj or .ply).
Mesh ReadMesh(const std::filesystem::path& path);

// "VMSQ" container: magic, u32 N, u32 n_frames, then n_frames * N * 3 f32.
std::vector<char> EncodeMeshSequence(const MeshSequence& seq);
MeshSequence DecodeMeshSequence(const std::vector<char>& bytes);
void SaveMeshSequence(const MeshSequence& seq,
                      const std::filesystem::path& path);
MeshSequence LoadMeshSequence(const std::filesystem::path& path);

// Rounds every coordinate to the nearest 32-bit value.
Vertices RoundToFloat(const Vertices& v);

}  // namespace voca

#endif  // VOCA_MESH_IO_H_
