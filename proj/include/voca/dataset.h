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

#ifndef VOCA_DATASET_H_
#define VOCA_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "voca/features.h"
#include "voca/head_model.h"
#include "voca/mesh_io.h"

namespace voca {

// One captured (or synthesized) sentence: 60 fps features and zero-pose
// meshes with one mesh per feature frame.
struct Sequence {
  std::string subject;
  std::string sentence;
  FeatureSequence features;
  MeshSequence meshes;
};

// A training frame. `condition` is the one-hot slot of the subject among the
// training subjects, or -1 for a subject outside that set.
struct TrainSample {
  int sequence = 0;
  int frame = 0;
  int condition = -1;
  bool has_previous = false;
};

class Dataset {
 public:
  const std::vector<Sequence>& sequences() const { return sequences_; }
  const Sequence& sequence(int i) const { return sequences_.at(i); }
  const WindowSequence& windows(int i) const { return windows_.at(i); }
  const std::map<std::string, Vertices>& templates() const {
    return templates_;
  }
  const Vertices& subject_template(const std::string& subject) const;

  // Sorted subject ids present in the dataset.
  std::vector<std::string> subjects() const;
  int window() const { return window_; }
  int feature_dim() const { return feature_dim_; }
  int n_vertices() const { return n_vertices_; }
  int total_frames() const;

  // mesh - template, evaluated in 64-bit.
  Vertices Displacement(int sequence, int frame) const;

 private:
  friend Dataset BuildDataset(std::vector<Sequence>,
                              std::map<std::string, Vertices>, int);
  std::vector<Sequence> sequences_;
  std::vector<WindowSequence> windows_;
  std::map<std::string, Vertices> templates_;
  int window_ = 0;
  int feature_dim_ = 0;
  int n_vertices_ = 0;
};

// Validates and windows every sequence. Errors: frame-count mismatch,
// missing template, inconsistent dimensions (data errors).
Dataset BuildDataset(std::vector<Sequence> sequences,
                     std::map<std::string, Vertices> templates, int window);

// Per-frame samples of the given sequences; conditions index into
// `condition_subjects` (sorted training subject ids).
std::vector<TrainSample> MakeSamples(
    const Dataset& dataset, const std::vector<int>& sequence_indices,
    const std::vector<std::string>& condition_subjects);

// Subjects per split plus per-split sentence exclusions. Text form:
//   train: s01 s02
//   val: s03
//   test: s04
//   val.exclude: sentence01 sentence02
struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::map<std::string, std::vector<std::string>> exclude;
};

SplitSpec ParseSplitSpec(std::string_view text);
std::string FormatSplitSpec(const SplitSpec& spec);

struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
  std::vector<std::string> training_subjects;  // sorted, one-hot order
  std::vector<std::string> warnings;
};

// Assigns sequences to splits. Overlapping subjects, or a validation/test
// sentence that also appears in another split, is a configuration error.
DatasetSplit SplitDataset(const Dataset& dataset, const SplitSpec& spec);

struct SyntheticSpec {
  int n_subjects = 2;
  int n_sentences = 2;
  int frames_per_sequence = 120;
  int n_vertices = 100;
  int feature_dim = 29;
  int window = 16;
  // Rank of each subject's ground-truth map (0 = full rank).
  int rank = 4;
  // Spectral norm of each subject's map.
  double map_norm = 0.05;
  // Length (frames) of the moving-average low-pass applied twice to the
  // feature noise.
  int smoothing = 8;
};

// Ground truth of a synthetic dataset: displacement = map[subject] *
// flatten(window), reshaped to N x 3.
struct SyntheticOracle {
  std::vector<std::string> subjects;
  std::vector<Eigen::MatrixXd> maps;  // 3N x (W * D)

  Vertices Displacement(int subject, const Eigen::Ref<const FeatureMatrix>&
                                         window) const;
};

struct SyntheticData {
  Dataset dataset;
  SplitSpec split;
  SyntheticOracle oracle;
  HeadModel model;
  // RMS over all target displacement coordinates.
  double displacement_scale = 0.0;
};

SyntheticData GenerateSynthetic(const SyntheticSpec& spec, uint64_t seed);

// On-disk layout:
//   dataset.txt                      key = value metadata
//   split.txt                        SplitSpec text
//   templates/<subject>.ply
//   sequences/<subject>/<sentence>/features.vfea, meshes.vmsq, meta.txt
//   head_model.vhed                  optional
void SaveDataset(const std::filesystem::path& dir, const Dataset& dataset,
                 const SplitSpec& split, const HeadModel* model = nullptr);

struct LoadedDataset {
  Dataset dataset;
  SplitSpec split;
};
LoadedDataset LoadDataset(const std::filesystem::path& dir);

}  // namespace voca

#endif  // VOCA_DATASET_H_
