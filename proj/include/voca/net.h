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

#ifndef VOCA_NET_H_
#define VOCA_NET_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace voca {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Encoder-decoder dimensions. The defaults reproduce the reference network:
// a 16 x 29 window plus an 8-way subject condition, four stride-2 temporal
// convolutions (32, 32, 64, 64), a 128-unit tanh layer, a 50-d encoding and
// a linear decoder to N x 3 vertex displacements.
struct NetConfig {
  int window = 16;
  int feature_dim = 29;
  int n_subjects = 8;
  std::vector<int> conv_channels = {32, 32, 64, 64};
  int fc1_units = 128;
  int latent = 50;
  int n_vertices = 5023;
  double bn_epsilon = 1e-3;

  void Validate() const;
  int depth() const { return static_cast<int>(conv_channels.size()); }
  int input_channels() const { return feature_dim + n_subjects; }
  // Temporal length after conv layer `layer` (0-based); kernel 3, stride 2,
  // one frame of zero padding on each side.
  int conv_length(int layer) const;
  int conv_in_channels(int layer) const;
  int flat_dim() const;
  int concat_dim() const { return flat_dim() + n_subjects; }
  int output_dim() const { return 3 * n_vertices; }

  bool operator==(const NetConfig&) const = default;
};

// Convex weights over the training subjects.
struct Condition {
  std::vector<double> weights;

  static Condition OneHot(int n, int index);
  static Condition Uniform(int n);
  // Simplex membership within 1e-6, else a parameter error.
  void Validate(int n) const;
  // One-hot within exact equality; returns the hot index or -1.
  int HotIndex() const;
};

struct PCABasis {
  Eigen::MatrixXd components;       // k x dim, orthonormal rows
  Eigen::VectorXd singular_values;  // decreasing
  Eigen::VectorXd mean;             // dim

  int size() const { return static_cast<int>(components.rows()); }
};

// Top-k principal directions of the row-centered data (M x dim, M >= k)
// via a thin SVD. The sign of each component is fixed so that its entry of
// largest magnitude is positive.
PCABasis ComputePca(const Eigen::MatrixXd& data, int k);

template <typename T>
struct ConvParams {
  Matrix<T> weight;  // (3 * C_in) x C_out, row index tap * C_in + channel
  Vector<T> bias;
  Vector<T> gamma;
  Vector<T> beta;
  Vector<T> running_mean;
  Vector<T> running_var;
};

enum class TensorRole { kTrainable, kStatistic, kPca };

template <typename T>
struct BasicNetworkParams {
  NetConfig config;
  // Subject id of each condition slot, in one-hot order.
  std::vector<std::string> subjects;
  std::vector<ConvParams<T>> conv;
  Matrix<T> fc1_weight;  // concat_dim x fc1_units
  Vector<T> fc1_bias;
  Matrix<T> fc2_weight;  // fc1_units x latent
  Vector<T> fc2_bias;
  Matrix<T> decoder_weight;  // latent x (3N); row j is latent unit j
  Vector<T> decoder_bias;
  Matrix<T> pca_components;
  Vector<T> pca_singular_values;
  Vector<T> pca_mean;

  // Correctly shaped, zero-filled parameters (running variance = 1).
  static BasicNetworkParams Zeros(const NetConfig& config);

  template <typename U>
  BasicNetworkParams<U> Cast() const;
};

using NetworkParams = BasicNetworkParams<float>;

// Visits every tensor as fn(name, tensor, shape, role). Works for const and
// mutable params alike.
template <typename P, typename F>
void ForEachTensor(P& p, F&& fn) {
  const NetConfig& c = p.config;
  auto u = [](Eigen::Index v) { return static_cast<uint32_t>(v); };
  for (size_t i = 0; i < p.conv.size(); ++i) {
    const std::string pre = "conv" + std::to_string(i + 1) + ".";
    auto& layer = p.conv[i];
    const uint32_t cin = u(c.conv_in_channels(static_cast<int>(i)));
    const uint32_t cout = u(c.conv_channels[i]);
    fn(pre + "weight", layer.weight, std::vector<uint32_t>{3, cin, cout},
       TensorRole::kTrainable);
    fn(pre + "bias", layer.bias, std::vector<uint32_t>{cout},
       TensorRole::kTrainable);
    fn(pre + "bn_gamma", layer.gamma, std::vector<uint32_t>{cout},
       TensorRole::kTrainable);
    fn(pre + "bn_beta", layer.beta, std::vector<uint32_t>{cout},
       TensorRole::kTrainable);
    fn(pre + "bn_running_mean", layer.running_mean,
       std::vector<uint32_t>{cout}, TensorRole::kStatistic);
    fn(pre + "bn_running_var", layer.running_var, std::vector<uint32_t>{cout},
       TensorRole::kStatistic);
  }
  fn(std::string("fc1.weight"), p.fc1_weight,
     std::vector<uint32_t>{u(c.concat_dim()), u(c.fc1_units)},
     TensorRole::kTrainable);
  fn(std::string("fc1.bias"), p.fc1_bias, std::vector<uint32_t>{u(c.fc1_units)},
     TensorRole::kTrainable);
  fn(std::string("fc2.weight"), p.fc2_weight,
     std::vector<uint32_t>{u(c.fc1_units), u(c.latent)},
     TensorRole::kTrainable);
  fn(std::string("fc2.bias"), p.fc2_bias, std::vector<uint32_t>{u(c.latent)},
     TensorRole::kTrainable);
  fn(std::string("decoder.weight"), p.decoder_weight,
     std::vector<uint32_t>{u(c.latent), u(c.output_dim())},
     TensorRole::kTrainable);
  fn(std::string("decoder.bias"), p.decoder_bias,
     std::vector<uint32_t>{u(c.output_dim())}, TensorRole::kTrainable);
  fn(std::string("pca.components"), p.pca_components,
     std::vector<uint32_t>{u(c.latent), u(c.output_dim())}, TensorRole::kPca);
  fn(std::string("pca.singular_values"), p.pca_singular_values,
     std::vector<uint32_t>{u(c.latent)}, TensorRole::kPca);
  fn(std::string("pca.mean"), p.pca_mean,
     std::vector<uint32_t>{u(c.output_dim())}, TensorRole::kPca);
}

// Encoder weights: uniform in +-sqrt(6 / fan_in) from `seed`; fc2 starts at
// zero so the initial encoding is zero; decoder rows are the PCA components
// (unit norm) and the decoder bias is zero.
NetworkParams InitParams(const NetConfig& config, const PCABasis& pca,
                         uint64_t seed,
                         std::vector<std::string> subjects = {});

enum class Mode { kTrain, kInfer };

// Activations of one batched forward pass, kept for backpropagation.
template <typename T>
struct ForwardCache {
  struct ConvCache {
    int length = 0;       // temporal length of this layer's output
    Matrix<T> cols;       // (B * L) x (3 * C_in) im2col of the input
    Matrix<T> pre;        // conv output before batch norm
    Matrix<T> normalized; // batch-normalized pre-activation (x-hat)
    Matrix<T> bn_out;     // gamma * x-hat + beta
    Matrix<T> out;        // ReLU(bn_out), (B * L) x C_out
    Vector<T> inv_std;
  };
  int batch = 0;
  Matrix<T> input;     // (B * W) x (D + S)
  std::vector<ConvCache> conv;
  Matrix<T> concat;    // B x concat_dim
  Matrix<T> hidden;    // B x fc1_units, after tanh
  Matrix<T> encoding;  // B x latent
  Matrix<T> output;    // B x 3N
  // Batch statistics per conv layer (train mode only).
  std::vector<Vector<T>> batch_mean;
  std::vector<Vector<T>> batch_var;
};

// Runs B windows (stacked as (B * W) x D rows) with per-window conditions
// (B x S). Train mode normalizes with batch statistics, infer mode with the
// running statistics.
template <typename T>
ForwardCache<T> ForwardBatch(const BasicNetworkParams<T>& params,
                             const Matrix<T>& windows,
                             const Matrix<T>& conditions, Mode mode);

// Gradients of sum(d_output .* output) with respect to every trainable
// tensor. Statistic and PCA tensors of the result are zero.
template <typename T>
BasicNetworkParams<T> BackwardBatch(const BasicNetworkParams<T>& params,
                                    const ForwardCache<T>& cache,
                                    const Matrix<T>& d_output, Mode mode);

// running = momentum * running + (1 - momentum) * batch statistic.
template <typename T>
void UpdateRunningStats(BasicNetworkParams<T>& params,
                        const ForwardCache<T>& cache, double momentum);

// Single-window conveniences. `window` is W x D.
template <typename T>
Vector<T> Encode(const BasicNetworkParams<T>& params,
                 const Matrix<T>& window, const Condition& cond, Mode mode);

// Affine decoder: encoding (latent) -> N x 3 displacements.
template <typename T>
Matrix<T> Decode(const BasicNetworkParams<T>& params,
                 const Vector<T>& encoding);

template <typename T>
Matrix<T> Forward(const BasicNetworkParams<T>& params,
                  const Matrix<T>& window, const Condition& cond, Mode mode);

// Human-readable shapes of each stage of the last forward pass, e.g.
// "16x1x37", "8x1x32", ..., "72", "128", "50", "5023x3".
template <typename T>
std::vector<std::string> ShapeTrace(const ForwardCache<T>& cache,
                                    const NetConfig& config);

}  // namespace voca

#endif  // VOCA_NET_H_
