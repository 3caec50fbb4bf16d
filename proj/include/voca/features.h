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

#ifndef VOCA_FEATURES_H_
#define VOCA_FEATURES_H_

#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "voca/audio.h"

namespace voca {

using FeatureMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FeatureKind { kFbank, kMfcc, kImportedLogits };

std::string_view FeatureKindName(FeatureKind kind);

// Time-indexed speech features, one row per frame.
struct FeatureSequence {
  FeatureMatrix frames;
  double fps = 0.0;
  FeatureKind kind = FeatureKind::kFbank;

  int n_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

// Overlapping windows, one per output frame, stored contiguously as
// n_windows x W x D.
class WindowSequence {
 public:
  using WindowMap = Eigen::Map<const FeatureMatrix>;

  WindowSequence() = default;
  WindowSequence(int n_windows, int window, int dim, double fps);

  int size() const { return n_windows_; }
  int window() const { return window_; }
  int dim() const { return dim_; }
  double fps() const { return fps_; }

  // W x D view of window i.
  WindowMap operator[](int i) const {
    return WindowMap(data_.data() + static_cast<size_t>(i) * window_ * dim_,
                     window_, dim_);
  }
  float* mutable_window(int i) {
    return data_.data() + static_cast<size_t>(i) * window_ * dim_;
  }
  const std::vector<float>& data() const { return data_; }

 private:
  int n_windows_ = 0;
  int window_ = 0;
  int dim_ = 0;
  double fps_ = 0.0;
  std::vector<float> data_;
};

struct FbankOptions {
  int n_filters = 26;
  double frame_length = 0.02;  // seconds
  double frame_step = 0.02;    // seconds
};

// Analysis parameters derived from the options for a given sample rate.
struct FbankLayout {
  int frame_samples = 0;
  int step_samples = 0;
  int fft_size = 0;
  // Filter centers in Hz, n_filters entries.
  std::vector<double> centers_hz;
};

FbankLayout MakeFbankLayout(const FbankOptions& options, int sample_rate);

// Triangular Mel filter weights, n_filters x (fft_size / 2 + 1).
Eigen::MatrixXd MelFilterbank(const FbankLayout& layout, int sample_rate);

double HzToMel(double hz);
double MelToHz(double mel);

// Floor applied to filter energies before the logarithm.
inline constexpr double kLogEnergyFloor = 1e-10;

// Log Mel-filterbank energies, fps = 1 / frame_step.
FeatureSequence ComputeFbank(const AudioClip& clip,
                             const FbankOptions& options = {});

// Unnormalized DCT-II: out[j] = sum_k in[k] cos(pi j (k + 0.5) / K).
Eigen::VectorXd DctII(const Eigen::Ref<const Eigen::VectorXd>& in, int n_out);

// First n_coeffs DCT-II coefficients of the log filterbank energies.
FeatureSequence ComputeMfcc(const AudioClip& clip, int n_coeffs = 26,
                            const FbankOptions& options = {});
FeatureSequence MfccFromFbank(const FeatureSequence& fbank, int n_coeffs);

// "VFEA" container: magic, u32 version (1), u32 rows, u32 cols, f32 fps, then
// rows * cols f32 in row-major order, little-endian.
std::vector<char> EncodeFeatures(const FeatureSequence& seq);
FeatureSequence DecodeFeatures(const std::vector<char>& bytes);
void ExportFeatures(const FeatureSequence& seq,
                    const std::filesystem::path& path);
FeatureSequence ImportFeatures(const std::filesystem::path& path);

// Linear interpolation onto a target rate. The first and last frames are
// anchored, so n_out = round(n_in * target_fps / fps) frames cover the same
// interval.
FeatureSequence ResampleFeatures(const FeatureSequence& seq,
                                 double target_fps);

inline constexpr double kNetworkFps = 60.0;

// Centered windows with edge replication: window i covers input frames
// [i - W/2, i - W/2 + W - 1].
WindowSequence WindowFeatures(const FeatureSequence& seq, int window);

}  // namespace voca

#endif  // VOCA_FEATURES_H_
