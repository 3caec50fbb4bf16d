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

#include "voca/mesh_io.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "voca/binary_io.h"
#include "voca/error.h"

namespace voca {

Vertices RoundToFloat(const Vertices& v) {
  return v.cast<float>().cast<double>();
}

void WriteObj(const std::filesystem::path& path, const Vertices& vertices,
              const std::vector<Face>& faces) {
  std::string text;
  text.reserve(vertices.rows() * 40 + faces.size() * 24);
  char line[128];
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    std::snprintf(line, sizeof(line), "v %.17g %.17g %.17g\n",
                  static_cast<double>(static_cast<float>(vertices(i, 0))),
                  static_cast<double>(static_cast<float>(vertices(i, 1))),
                  static_cast<double>(static_cast<float>(vertices(i, 2))));
    text += line;
  }
  for (const Face& f : faces) {
    std::snprintf(line, sizeof(line), "f %u %u %u\n", f[0] + 1, f[1] + 1,
                  f[2] + 1);
    text += line;
  }
  WriteFileAtomic(path, text);
}

Mesh ReadObj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::array<double, 3>> verts;
  Mesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      std::array<double, 3> p;
      if (!(ss >> p[0] >> p[1] >> p[2])) {
        Fail(ErrorCode::kFormat, "obj: bad vertex line: " + line);
      }
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<long> idx;
      std::string tok;
      while (ss >> tok) {
        // Accept "a", "a/b", "a/b/c" and "a//c".
        long v = 0;
        try {
          v = std::stol(tok.substr(0, tok.find('/')));
        } catch (const std::exception&) {
          Fail(ErrorCode::kFormat, "obj: bad face index: " + line);
        }
        if (v < 0) v = static_cast<long>(verts.size()) + v + 1;
        idx.push_back(v - 1);
      }
      if (idx.size() < 3) Fail(ErrorCode::kFormat, "obj: short face: " + line);
      // Fan-triangulate polygons.
      for (size_t k = 1; k + 1 < idx.size(); ++k) {
        mesh.faces.push_back({static_cast<uint32_t>(idx[0]),
                              static_cast<uint32_t>(idx[k]),
                              static_cast<uint32_t>(idx[k + 1])});
      }
    }
  }
  mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) {
    for (int c = 0; c < 3; ++c) mesh.vertices(i, c) = verts[i][c];
  }
  for (const Face& f : mesh.faces) {
    for (uint32_t v : f) {
      if (v >= verts.size()) Fail(ErrorCode::kFormat, "obj: face index range");
    }
  }
  return mesh;
}

void WritePly(const std::filesystem::path& path, const Vertices& vertices,
              const std::vector<Face>& faces) {
  std::string header =
      "ply\nformat binary_little_endian 1.0\nelement vertex " +
      std::to_string(vertices.rows()) +
      "\nproperty float x\nproperty float y\nproperty float z\n"
      "element face " +
      std::to_string(faces.size()) +
      "\nproperty list uchar int vertex_indices\nend_header\n";
  ByteWriter out;
  out.Bytes(header.data(), header.size());
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    for (int c = 0; c < 3; ++c) out.F32(static_cast<float>(vertices(i, c)));
  }
  for (const Face& f : faces) {
    out.U8(3);
    for (uint32_t v : f) out.I32(static_cast<int32_t>(v));
  }
  WriteFileAtomic(path, out.buffer());
}

Mesh ReadPly(const std::filesystem::path& path) {
  std::vector<char> bytes = ReadFileBytes(path);
  std::string text(bytes.begin(), bytes.end());
  size_t end = text.find("end_header\n");
  if (text.rfind("ply\n", 0) != 0 || end == std::string::npos) {
    Fail(ErrorCode::kFormat, "ply: missing header");
  }
  std::istringstream header(text.substr(0, end));
  std::string line;
  long n_vertices = -1, n_faces = 0;
  int vertex_props = 0;
  bool in_vertex = false;
  bool binary_le = false;
  while (std::getline(header, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (tag == "element") {
      std::string name;
      long count;
      ss >> name >> count;
      in_vertex = name == "vertex";
      if (in_vertex) n_vertices = count;
      if (name == "face") n_faces = count;
    } else if (tag == "property" && in_vertex) {
      std::string type;
      ss >> type;
      if (type != "float" && type != "float32") {
        Fail(ErrorCode::kUnsupported, "ply: vertex property type " + type);
      }
      ++vertex_props;
    }
  }
  if (!binary_le) Fail(ErrorCode::kUnsupported, "ply: only binary LE");
  if (n_vertices < 0 || vertex_props < 3) {
    Fail(ErrorCode::kFormat, "ply: missing vertex element");
  }
  std::span<const char> payload(bytes.data() + end + 11,
                                bytes.size() - end - 11);
  ByteReader in(payload, "ply");
  Mesh mesh;
  mesh.vertices.resize(n_vertices, 3);
  for (long i = 0; i < n_vertices; ++i) {
    for (int p = 0; p < vertex_props; ++p) {
      float v = in.F32();
      if (p < 3) mesh.vertices(i, p) = v;
    }
  }
  for (long i = 0; i < n_faces; ++i) {
    uint8_t count = in.U8();
    std::vector<int32_t> idx(count);
    for (auto& v : idx) {
      v = in.I32();
      if (v < 0 || v >= n_vertices) Fail(ErrorCode::kFormat, "ply: index");
    }
    for (size_t k = 1; k + 1 < idx.size(); ++k) {
      mesh.faces.push_back({static_cast<uint32_t>(idx[0]),
                            static_cast<uint32_t>(idx[k]),
                            static_cast<uint32_t>(idx[k + 1])});
    }
  }
  return mesh;
}

Mesh ReadMesh(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  if (ext == ".obj") return ReadObj(path);
  if (ext == ".ply") return ReadPly(path);
  Fail(ErrorCode::kUnsupported, "mesh extension " + ext);
}

std::vector<char> EncodeMeshSequence(const MeshSequence& seq) {
  Require(!seq.frames.empty(), ErrorCode::kEmptyInput, "empty mesh sequence");
  const Eigen::Index n = seq.frames.front().rows();
  ByteWriter out;
  out.Magic("VMSQ");
  out.U32(static_cast<uint32_t>(n));
  out.U32(static_cast<uint32_t>(seq.frames.size()));
  for (const Vertices& frame : seq.frames) {
    Require(frame.rows() == n, ErrorCode::kParameter,
            "mesh sequence frames differ in vertex count");
    for (Eigen::Index i = 0; i < frame.size(); ++i) {
      out.F32(static_cast<float>(frame.data()[i]));
    }
  }
  return out.buffer();
}

MeshSequence DecodeMeshSequence(const std::vector<char>& bytes) {
  ByteReader in(bytes, "mesh sequence");
  in.ExpectMagic("VMSQ");
  uint32_t n = in.U32();
  uint32_t frames = in.U32();
  Require(n > 0 && frames > 0, ErrorCode::kFormat,
          "mesh sequence has zero vertices or frames");
  Require(in.remaining() == static_cast<size_t>(n) * 3 * frames * 4,
          ErrorCode::kFormat, "mesh sequence payload size mismatch");
  MeshSequence seq;
  seq.frames.resize(frames);
  std::vector<float> buf(static_cast<size_t>(n) * 3);
  for (auto& frame : seq.frames) {
    in.F32s(buf);
    frame = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, 3,
                                           Eigen::RowMajor>>(buf.data(), n, 3)
                .cast<double>();
  }
  return seq;
}

void SaveMeshSequence(const MeshSequence& seq,
                      const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeMeshSequence(seq));
}

MeshSequence LoadMeshSequence(const std::filesystem::path& path) {
  return DecodeMeshSequence(ReadFileBytes(path));
}

}  // namespace voca
