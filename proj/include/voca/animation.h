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

#ifndef VOCA_ANIMATION_H_
#define VOCA_ANIMATION_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "voca/features.h"
#include "voca/head_model.h"
#include "voca/mesh_io.h"
#include "voca/net.h"

namespace voca {

// template + network displacement for every window, infer mode, 60 fps. The
// style is fed to the encoder as the condition vector.
MeshSequence Animate(const NetworkParams& params, const Vertices& templ,
                     const WindowSequence& windows, const Condition& style);

// Encodes every window once per training subject (one-hot condition), mixes
// the encodings with `weights` and decodes. One-hot weights reproduce Animate
// with that condition exactly.
MeshSequence InterpolateStyles(const NetworkParams& params,
                               const WindowSequence& windows,
                               const Vertices& templ, const Condition& weights);

// Per-frame Euclidean distance between two vertices.
std::vector<double> LipDistance(const MeshSequence& meshes, int upper,
                                int lower);

// Adds the (32-bit rounded) identity offsets to every frame.
MeshSequence EditIdentity(const MeshSequence& seq, const HeadModel& model,
                          std::span<const double> beta);

// Poses every frame; a single pose is broadcast to all frames.
MeshSequence EditPose(const MeshSequence& seq, const HeadModel& model,
                      const std::vector<Pose>& poses);

enum class MeshFormat { kObj, kPly };
MeshFormat ParseMeshFormat(std::string_view name);

// frame_000000.<ext>, frame_000001.<ext>, ... Returns the written paths.
std::vector<std::filesystem::path> ExportSequence(
    const MeshSequence& meshes, const std::vector<Face>& faces,
    const std::filesystem::path& dir, MeshFormat format);

// "frame,distance_m" lines.
std::string FormatLipMetric(const std::vector<double>& series);
void WriteLipMetric(const std::filesystem::path& path,
                    const std::vector<double>& series);

// Linear resampling of a per-frame series to another rate, for plotting.
std::vector<double> ResampleSeries(const std::vector<double>& series,
                                   double fps, double target_fps);
// "time_s,distance_m" lines of the resampled series.
void WritePlotData(const std::filesystem::path& path,
                   const std::vector<double>& series, double fps,
                   double target_fps);

}  // namespace voca

#endif  // VOCA_ANIMATION_H_
