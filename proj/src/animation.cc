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

#include "voca/animation.h"

#include <cmath>
#include <cstdio>

#include "voca/binary_io.h"
#include "voca/error.h"
#include "voca/parallel.h"

namespace voca {

namespace {

// Fixed chunking keeps batched products identical between code paths.
constexpr int kChunk = 64;

Matrix<float> StackChunk(const WindowSequence& windows, int begin, int end) {
  const int w = windows.window();
  Matrix<float> out(static_cast<Eigen::Index>(end - begin) * w, windows.dim());
  for (int i = begin; i < end; ++i) {
    out.middleRows(static_cast<Eigen::Index>(i - begin) * w, w) = windows[i];
  }
  return out;
}

Matrix<float> ConditionRows(const Condition& c, int rows) {
  Matrix<float> out(rows, c.weights.size());
  for (int r = 0; r < rows; ++r) {
    for (size_t j = 0; j < c.weights.size(); ++j) {
      out(r, j) = static_cast<float>(c.weights[j]);
    }
  }
  return out;
}

void CheckInputs(const NetworkParams& params, const Vertices& templ,
                 const WindowSequence& windows) {
  const NetConfig& c = params.config;
  Require(templ.rows() == c.n_vertices, ErrorCode::kParameter,
          "template has " + std::to_string(templ.rows()) +
              " vertices, network outputs " + std::to_string(c.n_vertices));
  Require(windows.window() == c.window && windows.dim() == c.feature_dim,
          ErrorCode::kParameter,
          "windows are " + std::to_string(windows.window()) + "x" +
              std::to_string(windows.dim()) + ", network expects " +
              std::to_string(c.window) + "x" + std::to_string(c.feature_dim));
}

Vertices AddDisplacement(const Vertices& templ, const float* row) {
  Vertices out = templ;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.data()[i] += static_cast<double>(row[i]);
  }
  return out;
}

}  // namespace

MeshSequence Animate(const NetworkParams& params, const Vertices& templ,
                     const WindowSequence& windows, const Condition& style) {
  CheckInputs(params, templ, windows);
  style.Validate(params.config.n_subjects);
  MeshSequence out;
  out.fps = kNetworkFps;
  out.frames.resize(windows.size());
  const int n = windows.size();
  ParallelFor((n + kChunk - 1) / kChunk, [&](size_t cb, size_t ce) {
    for (size_t c = cb; c < ce; ++c) {
      const int begin = static_cast<int>(c) * kChunk;
      const int end = std::min(n, begin + kChunk);
      const ForwardCache<float> cache =
          ForwardBatch(params, StackChunk(windows, begin, end),
                       ConditionRows(style, end - begin), Mode::kInfer);
      for (int i = begin; i < end; ++i) {
        out.frames[i] = AddDisplacement(templ, cache.output.row(i - begin).data());
      }
    }
  });
  return out;
}

MeshSequence InterpolateStyles(const NetworkParams& params,
                               const WindowSequence& windows,
                               const Vertices& templ,
                               const Condition& weights) {
  const int s = params.config.n_subjects;
  weights.Validate(s);
  const int hot = weights.HotIndex();
  if (hot >= 0) return Animate(params, templ, windows, weights);
  CheckInputs(params, templ, windows);

  MeshSequence out;
  out.fps = kNetworkFps;
  out.frames.resize(windows.size());
  const int n = windows.size();
  ParallelFor((n + kChunk - 1) / kChunk, [&](size_t cb, size_t ce) {
    for (size_t c = cb; c < ce; ++c) {
      const int begin = static_cast<int>(c) * kChunk;
      const int end = std::min(n, begin + kChunk);
      const Matrix<float> stacked = StackChunk(windows, begin, end);
      Matrix<double> mixed =
          Matrix<double>::Zero(end - begin, params.config.latent);
      for (int j = 0; j < s; ++j) {
        if (weights.weights[j] == 0.0) continue;
        const ForwardCache<float> cache =
            ForwardBatch(params, stacked,
                         ConditionRows(Condition::OneHot(s, j), end - begin),
                         Mode::kInfer);
        mixed += weights.weights[j] * cache.encoding.cast<double>();
      }
      const Matrix<float> z = mixed.cast<float>();
      for (int i = begin; i < end; ++i) {
        const Matrix<float> d =
            Decode(params, Vector<float>(z.row(i - begin).transpose()));
        out.frames[i] = AddDisplacement(templ, d.data());
      }
    }
  });
  return out;
}

std::vector<double> LipDistance(const MeshSequence& meshes, int upper,
                                int lower) {
  std::vector<double> out;
  out.reserve(meshes.size());
  for (const Vertices& v : meshes.frames) {
    Require(upper >= 0 && lower >= 0 && upper < v.rows() && lower < v.rows(),
            ErrorCode::kParameter,
            "lip vertex index out of range (" + std::to_string(upper) + ", " +
                std::to_string(lower) + ") for " + std::to_string(v.rows()) +
                " vertices");
    out.push_back((v.row(upper) - v.row(lower)).norm());
  }
  return out;
}

MeshSequence EditIdentity(const MeshSequence& seq, const HeadModel& model,
                          std::span<const double> beta) {
  const Vertices offsets = RoundToFloat(ShapeOffsets(model, beta));
  MeshSequence out = seq;
  for (Vertices& f : out.frames) {
    Require(f.rows() == offsets.rows(), ErrorCode::kParameter,
            "sequence vertex count differs from the head model");
    f += offsets;
  }
  return out;
}

MeshSequence EditPose(const MeshSequence& seq, const HeadModel& model,
                      const std::vector<Pose>& poses) {
  Require(poses.size() == 1 || poses.size() == seq.frames.size(),
          ErrorCode::kParameter,
          "pose track has " + std::to_string(poses.size()) + " entries for " +
              std::to_string(seq.frames.size()) + " frames");
  MeshSequence out;
  out.fps = seq.fps;
  out.frames.resize(seq.frames.size());
  ParallelFor(seq.frames.size(), [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) {
      const Pose& p = poses.size() == 1 ? poses[0] : poses[i];
      out.frames[i] = PoseMesh(model, seq.frames[i], p);
    }
  });
  return out;
}

MeshFormat ParseMeshFormat(std::string_view name) {
  if (name == "obj") return MeshFormat::kObj;
  if (name == "ply") return MeshFormat::kPly;
  Fail(ErrorCode::kParameter,
       "unknown mesh format '" + std::string(name) + "' (obj|ply)");
}

std::vector<std::filesystem::path> ExportSequence(
    const MeshSequence& meshes, const std::vector<Face>& faces,
    const std::filesystem::path& dir, MeshFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  Require(!ec && std::filesystem::is_directory(dir), ErrorCode::kIo,
          "cannot create directory " + dir.string());
  std::vector<std::filesystem::path> paths(meshes.frames.size());
  for (size_t i = 0; i < meshes.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06zu.%s", i,
                  format == MeshFormat::kObj ? "obj" : "ply");
    paths[i] = dir / name;
  }
  ParallelFor(paths.size(), [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) {
      if (format == MeshFormat::kObj) {
        WriteObj(paths[i], meshes.frames[i], faces);
      } else {
        WritePly(paths[i], meshes.frames[i], faces);
      }
    }
  });
  return paths;
}

std::string FormatLipMetric(const std::vector<double>& series) {
  std::string out = "frame,distance_m\n";
  char buf[64];
  for (size_t i = 0; i < series.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i, series[i]);
    out += buf;
  }
  return out;
}

void WriteLipMetric(const std::filesystem::path& path,
                    const std::vector<double>& series) {
  WriteFileAtomic(path, FormatLipMetric(series));
}

std::vector<double> ResampleSeries(const std::vector<double>& series,
                                   double fps, double target_fps) {
  Require(fps > 0 && target_fps > 0, ErrorCode::kParameter,
          "frame rates must be positive");
  Require(series.size() >= 2, ErrorCode::kInsufficientData,
          "resampling needs at least two frames");
  const size_t n_in = series.size();
  const size_t n_out = std::max<size_t>(
      2, static_cast<size_t>(std::llround(n_in * target_fps / fps)));
  std::vector<double> out(n_out);
  for (size_t j = 0; j < n_out; ++j) {
    const double pos = static_cast<double>(j) * (n_in - 1) / (n_out - 1);
    const size_t a = std::min(static_cast<size_t>(pos), n_in - 2);
    const double w = pos - a;
    out[j] = series[a] + w * (series[a + 1] - series[a]);
  }
  return out;
}

void WritePlotData(const std::filesystem::path& path,
                   const std::vector<double>& series, double fps,
                   double target_fps) {
  const std::vector<double> r = ResampleSeries(series, fps, target_fps);
  const double duration = (series.size() - 1) / fps;
  std::string out = "time_s,distance_m\n";
  char buf[64];
  for (size_t j = 0; j < r.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n",
                  duration * j / (r.size() - 1), r[j]);
    out += buf;
  }
  WriteFileAtomic(path, out);
}

}  // namespace voca
