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

#include "voca/features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "voca/binary_io.h"
#include "voca/error.h"
#include "voca/parallel.h"

namespace voca {
namespace {

constexpr uint32_t kFeatureVersion = 1;
constexpr double kReferenceRate = 22050.0;
constexpr int kReferenceFftSize = 512;

}  // namespace

std::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kFbank: return "fbank";
    case FeatureKind::kMfcc: return "mfcc";
    case FeatureKind::kImportedLogits: return "imported-logits";
  }
  return "unknown";
}

WindowSequence::WindowSequence(int n_windows, int window, int dim, double fps)
    : n_windows_(n_windows),
      window_(window),
      dim_(dim),
      fps_(fps),
      data_(static_cast<size_t>(n_windows) * window * dim, 0.0f) {}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

FbankLayout MakeFbankLayout(const FbankOptions& options, int sample_rate) {
  Require(sample_rate > 0, ErrorCode::kParameter, "sample rate must be > 0");
  Require(options.n_filters >= 1, ErrorCode::kParameter, "n_filters < 1");
  Require(options.frame_length > 0 && options.frame_step > 0,
          ErrorCode::kParameter, "frame length and step must be positive");
  FbankLayout layout;
  layout.frame_samples =
      static_cast<int>(std::lround(options.frame_length * sample_rate));
  layout.step_samples =
      static_cast<int>(std::lround(options.frame_step * sample_rate));
  Require(layout.frame_samples >= 1 && layout.step_samples >= 1,
          ErrorCode::kParameter, "frame shorter than one sample");
  int scaled = static_cast<int>(
      std::lround(kReferenceFftSize * sample_rate / kReferenceRate));
  layout.fft_size = std::max(layout.frame_samples, scaled);

  double mel_hi = HzToMel(sample_rate / 2.0);
  layout.centers_hz.resize(options.n_filters);
  for (int m = 0; m < options.n_filters; ++m) {
    layout.centers_hz[m] = MelToHz(mel_hi * (m + 1) / (options.n_filters + 1));
  }
  return layout;
}

Eigen::MatrixXd MelFilterbank(const FbankLayout& layout, int sample_rate) {
  const int n_filters = static_cast<int>(layout.centers_hz.size());
  const int n_bins = layout.fft_size / 2 + 1;
  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(n_filters, n_bins);
  const double nyquist = sample_rate / 2.0;
  for (int m = 0; m < n_filters; ++m) {
    double lo = m == 0 ? 0.0 : layout.centers_hz[m - 1];
    double center = layout.centers_hz[m];
    double hi = m + 1 < n_filters ? layout.centers_hz[m + 1] : nyquist;
    for (int k = 0; k < n_bins; ++k) {
      double f = static_cast<double>(k) * sample_rate / layout.fft_size;
      if (f >= lo && f <= center) {
        bank(m, k) = (f - lo) / (center - lo);
      } else if (f > center && f <= hi) {
        bank(m, k) = (hi - f) / (hi - center);
      }
    }
  }
  return bank;
}

namespace {

// Log filterbank energies in 64-bit, n_frames x n_filters.
Eigen::MatrixXd LogFilterbankEnergies(const AudioClip& clip,
                                      const FbankOptions& options,
                                      FbankLayout* layout_out) {
  Require(clip.sample_rate > 0, ErrorCode::kParameter,
          "sample rate must be > 0");
  FbankLayout layout = MakeFbankLayout(options, clip.sample_rate);
  const int64_t n_samples = static_cast<int64_t>(clip.samples.size());
  Require(n_samples >= layout.frame_samples, ErrorCode::kEmptyInput,
          "clip shorter than one analysis frame");
  const int n_frames = static_cast<int>(
      (n_samples - layout.frame_samples) / layout.step_samples + 1);
  const Eigen::MatrixXd bank = MelFilterbank(layout, clip.sample_rate);
  const int n_bins = layout.fft_size / 2 + 1;

  std::vector<double> hann(layout.frame_samples, 1.0);
  if (layout.frame_samples > 1) {
    for (int n = 0; n < layout.frame_samples; ++n) {
      hann[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n /
                                     (layout.frame_samples - 1));
    }
  }

  Eigen::MatrixXd out(n_frames, bank.rows());
  ParallelFor(n_frames, [&](size_t begin, size_t end) {
    Eigen::FFT<double> fft;
    std::vector<double> buffer(layout.fft_size);
    std::vector<std::complex<double>> spectrum;
    Eigen::VectorXd power(n_bins);
    for (size_t f = begin; f < end; ++f) {
      std::fill(buffer.begin(), buffer.end(), 0.0);
      const size_t offset = f * layout.step_samples;
      for (int n = 0; n < layout.frame_samples; ++n) {
        buffer[n] = clip.samples[offset + n] * hann[n];
      }
      fft.fwd(spectrum, buffer);
      for (int k = 0; k < n_bins; ++k) {
        power[k] = std::norm(spectrum[k]) / layout.fft_size;
      }
      Eigen::VectorXd energies = bank * power;
      for (int m = 0; m < energies.size(); ++m) {
        out(f, m) = std::log(std::max(energies[m], kLogEnergyFloor));
      }
    }
  });
  if (layout_out) *layout_out = layout;
  return out;
}

}  // namespace

FeatureSequence ComputeFbank(const AudioClip& clip,
                             const FbankOptions& options) {
  Eigen::MatrixXd energies = LogFilterbankEnergies(clip, options, nullptr);
  FeatureSequence seq;
  seq.frames = energies.cast<float>();
  seq.fps = 1.0 / options.frame_step;
  seq.kind = FeatureKind::kFbank;
  return seq;
}

Eigen::VectorXd DctII(const Eigen::Ref<const Eigen::VectorXd>& in,
                      int n_out) {
  const int k_in = static_cast<int>(in.size());
  Eigen::VectorXd out(n_out);
  for (int j = 0; j < n_out; ++j) {
    double acc = 0.0;
    for (int k = 0; k < k_in; ++k) {
      acc += in[k] * std::cos(std::numbers::pi * j * (k + 0.5) / k_in);
    }
    out[j] = acc;
  }
  return out;
}

FeatureSequence MfccFromFbank(const FeatureSequence& fbank, int n_coeffs) {
  Require(n_coeffs >= 1, ErrorCode::kParameter, "n_coeffs < 1");
  Require(n_coeffs <= fbank.dim(), ErrorCode::kParameter,
          "n_coeffs " + std::to_string(n_coeffs) + " exceeds n_filters " +
              std::to_string(fbank.dim()));
  FeatureSequence seq;
  seq.frames.resize(fbank.n_frames(), n_coeffs);
  for (int f = 0; f < fbank.n_frames(); ++f) {
    Eigen::VectorXd row = fbank.frames.row(f).transpose().cast<double>();
    seq.frames.row(f) = DctII(row, n_coeffs).transpose().cast<float>();
  }
  seq.fps = fbank.fps;
  seq.kind = FeatureKind::kMfcc;
  return seq;
}

FeatureSequence ComputeMfcc(const AudioClip& clip, int n_coeffs,
                            const FbankOptions& options) {
  Require(n_coeffs <= options.n_filters, ErrorCode::kParameter,
          "n_coeffs " + std::to_string(n_coeffs) + " exceeds n_filters " +
              std::to_string(options.n_filters));
  // The cepstrum is taken from the stored 32-bit filterbank so that it agrees
  // with MfccFromFbank(ComputeFbank(...)) exactly.
  return MfccFromFbank(ComputeFbank(clip, options), n_coeffs);
}

std::vector<char> EncodeFeatures(const FeatureSequence& seq) {
  Require(seq.n_frames() >= 1 && seq.dim() >= 1, ErrorCode::kEmptyInput,
          "feature sequence is empty");
  ByteWriter out;
  out.Magic("VFEA");
  out.U32(kFeatureVersion);
  out.U32(static_cast<uint32_t>(seq.n_frames()));
  out.U32(static_cast<uint32_t>(seq.dim()));
  out.F32(static_cast<float>(seq.fps));
  out.F32s(std::span<const float>(seq.frames.data(), seq.frames.size()));
  return out.buffer();
}

FeatureSequence DecodeFeatures(const std::vector<char>& bytes) {
  ByteReader in(bytes, "feature container");
  in.ExpectMagic("VFEA");
  uint32_t version = in.U32();
  Require(version == kFeatureVersion, ErrorCode::kFormat,
          "feature container version " + std::to_string(version));
  uint32_t rows = in.U32();
  uint32_t cols = in.U32();
  float fps = in.F32();
  Require(rows > 0, ErrorCode::kEmptyInput, "feature container has 0 rows");
  Require(cols > 0, ErrorCode::kFormat, "feature container has 0 columns");
  Require(std::isfinite(fps) && fps > 0.0f, ErrorCode::kFormat,
          "feature container fps must be positive");
  Require(in.remaining() == static_cast<size_t>(rows) * cols * 4,
          ErrorCode::kFormat, "feature container payload size mismatch");
  FeatureSequence seq;
  seq.frames.resize(rows, cols);
  in.F32s(std::span<float>(seq.frames.data(), seq.frames.size()));
  seq.fps = fps;
  seq.kind = FeatureKind::kImportedLogits;
  return seq;
}

void ExportFeatures(const FeatureSequence& seq,
                    const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeFeatures(seq));
}

FeatureSequence ImportFeatures(const std::filesystem::path& path) {
  return DecodeFeatures(ReadFileBytes(path));
}

FeatureSequence ResampleFeatures(const FeatureSequence& seq,
                                 double target_fps) {
  Require(seq.n_frames() >= 2, ErrorCode::kInsufficientData,
          "resampling needs at least two frames");
  Require(target_fps > 0.0 && seq.fps > 0.0, ErrorCode::kParameter,
          "fps must be positive");
  const int n_in = seq.n_frames();
  const int n_out = std::max(
      1, static_cast<int>(std::lround(n_in * target_fps / seq.fps)));
  FeatureSequence out;
  out.frames.resize(n_out, seq.dim());
  out.fps = target_fps;
  out.kind = seq.kind;
  for (int j = 0; j < n_out; ++j) {
    double pos = n_out == 1 ? 0.0
                            : static_cast<double>(j) * (n_in - 1) / (n_out - 1);
    int lo = std::min(static_cast<int>(std::floor(pos)), n_in - 1);
    int hi = std::min(lo + 1, n_in - 1);
    double w = pos - lo;
    for (int d = 0; d < seq.dim(); ++d) {
      double a = seq.frames(lo, d);
      double b = seq.frames(hi, d);
      // a + w * (b - a) reproduces a exactly when a == b.
      out.frames(j, d) = static_cast<float>(a + w * (b - a));
    }
  }
  return out;
}

WindowSequence WindowFeatures(const FeatureSequence& seq, int window) {
  Require(window >= 1, ErrorCode::kParameter, "window length must be >= 1");
  Require(seq.n_frames() >= 1 && seq.dim() >= 1, ErrorCode::kEmptyInput,
          "feature sequence is empty");
  Require(std::abs(seq.fps - kNetworkFps) < 1e-6, ErrorCode::kParameter,
          "windowing expects 60 fps features, got " + std::to_string(seq.fps));
  const int n = seq.n_frames();
  const int dim = seq.dim();
  const int half = window / 2;
  WindowSequence out(n, window, dim, seq.fps);
  for (int i = 0; i < n; ++i) {
    float* dst = out.mutable_window(i);
    for (int r = 0; r < window; ++r) {
      int src = std::clamp(i - half + r, 0, n - 1);
      std::copy_n(seq.frames.row(src).data(), dim, dst + r * dim);
    }
  }
  return out;
}

}  // namespace voca
