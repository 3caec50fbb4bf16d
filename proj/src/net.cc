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

#include "voca/net.h"

#include <cmath>
#include <string>

#include "voca/error.h"
#include "voca/random.h"

namespace voca {

void NetConfig::Validate() const {
  Require(window >= 1 && feature_dim >= 1 && n_subjects >= 1 &&
              fc1_units >= 1 && latent >= 1 && n_vertices >= 1,
          ErrorCode::kParameter, "network dimensions must be positive");
  Require(!conv_channels.empty(), ErrorCode::kParameter,
          "at least one conv layer is required");
  for (int c : conv_channels) {
    Require(c >= 1, ErrorCode::kParameter, "conv channels must be positive");
  }
  Require(bn_epsilon > 0.0, ErrorCode::kParameter, "bn epsilon must be > 0");
}

int NetConfig::conv_length(int layer) const {
  int length = window;
  for (int i = 0; i <= layer; ++i) length = (length + 1) / 2;
  return length;
}

int NetConfig::conv_in_channels(int layer) const {
  return layer == 0 ? input_channels() : conv_channels[layer - 1];
}

int NetConfig::flat_dim() const {
  return conv_length(depth() - 1) * conv_channels.back();
}

Condition Condition::OneHot(int n, int index) {
  Require(index >= 0 && index < n, ErrorCode::kParameter,
          "condition index " + std::to_string(index) + " out of range");
  Condition c;
  c.weights.assign(n, 0.0);
  c.weights[index] = 1.0;
  return c;
}

Condition Condition::Uniform(int n) {
  Require(n >= 1, ErrorCode::kParameter, "empty condition");
  Condition c;
  c.weights.assign(n, 1.0 / n);
  return c;
}

void Condition::Validate(int n) const {
  Require(static_cast<int>(weights.size()) == n, ErrorCode::kParameter,
          "condition has " + std::to_string(weights.size()) +
              " weights, expected " + std::to_string(n));
  double sum = 0.0;
  for (double w : weights) {
    Require(std::isfinite(w) && w >= 0.0, ErrorCode::kParameter,
            "condition weights must be nonnegative");
    sum += w;
  }
  Require(std::abs(sum - 1.0) <= 1e-6, ErrorCode::kParameter,
          "condition weights sum to " + std::to_string(sum) + ", not 1");
}

int Condition::HotIndex() const {
  int hot = -1;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 1.0 && hot < 0) {
      hot = static_cast<int>(i);
    } else if (weights[i] != 0.0) {
      return -1;
    }
  }
  return hot;
}

template <typename T>
BasicNetworkParams<T> BasicNetworkParams<T>::Zeros(const NetConfig& config) {
  config.Validate();
  BasicNetworkParams<T> p;
  p.config = config;
  p.conv.resize(config.depth());
  for (int i = 0; i < config.depth(); ++i) {
    const int cin = config.conv_in_channels(i);
    const int cout = config.conv_channels[i];
    auto& l = p.conv[i];
    l.weight = Matrix<T>::Zero(3 * cin, cout);
    l.bias = Vector<T>::Zero(cout);
    l.gamma = Vector<T>::Zero(cout);
    l.beta = Vector<T>::Zero(cout);
    l.running_mean = Vector<T>::Zero(cout);
    l.running_var = Vector<T>::Ones(cout);
  }
  p.fc1_weight = Matrix<T>::Zero(config.concat_dim(), config.fc1_units);
  p.fc1_bias = Vector<T>::Zero(config.fc1_units);
  p.fc2_weight = Matrix<T>::Zero(config.fc1_units, config.latent);
  p.fc2_bias = Vector<T>::Zero(config.latent);
  p.decoder_weight = Matrix<T>::Zero(config.latent, config.output_dim());
  p.decoder_bias = Vector<T>::Zero(config.output_dim());
  p.pca_components = Matrix<T>::Zero(config.latent, config.output_dim());
  p.pca_singular_values = Vector<T>::Zero(config.latent);
  p.pca_mean = Vector<T>::Zero(config.output_dim());
  return p;
}

template <typename T>
template <typename U>
BasicNetworkParams<U> BasicNetworkParams<T>::Cast() const {
  BasicNetworkParams<U> out;
  out.config = config;
  out.subjects = subjects;
  out.conv.resize(conv.size());
  for (size_t i = 0; i < conv.size(); ++i) {
    out.conv[i].weight = conv[i].weight.template cast<U>();
    out.conv[i].bias = conv[i].bias.template cast<U>();
    out.conv[i].gamma = conv[i].gamma.template cast<U>();
    out.conv[i].beta = conv[i].beta.template cast<U>();
    out.conv[i].running_mean = conv[i].running_mean.template cast<U>();
    out.conv[i].running_var = conv[i].running_var.template cast<U>();
  }
  out.fc1_weight = fc1_weight.template cast<U>();
  out.fc1_bias = fc1_bias.template cast<U>();
  out.fc2_weight = fc2_weight.template cast<U>();
  out.fc2_bias = fc2_bias.template cast<U>();
  out.decoder_weight = decoder_weight.template cast<U>();
  out.decoder_bias = decoder_bias.template cast<U>();
  out.pca_components = pca_components.template cast<U>();
  out.pca_singular_values = pca_singular_values.template cast<U>();
  out.pca_mean = pca_mean.template cast<U>();
  return out;
}

NetworkParams InitParams(const NetConfig& config, const PCABasis& pca,
                         uint64_t seed, std::vector<std::string> subjects) {
  config.Validate();
  Require(pca.size() == config.latent, ErrorCode::kParameter,
          "PCA has " + std::to_string(pca.size()) + " components, latent is " +
              std::to_string(config.latent));
  Require(pca.components.cols() == config.output_dim(), ErrorCode::kParameter,
          "PCA dimension " + std::to_string(pca.components.cols()) +
              " != 3N = " + std::to_string(config.output_dim()));
  Require(subjects.empty() ||
              static_cast<int>(subjects.size()) == config.n_subjects,
          ErrorCode::kParameter, "subject list size != n_subjects");

  NetworkParams p = NetworkParams::Zeros(config);
  p.subjects = std::move(subjects);
  Rng rng(seed);
  auto fill_uniform = [&](Matrix<float>& m, int fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = static_cast<float>(rng.Uniform(-bound, bound));
    }
  };
  for (int i = 0; i < config.depth(); ++i) {
    fill_uniform(p.conv[i].weight, 3 * config.conv_in_channels(i));
    p.conv[i].gamma.setOnes();
  }
  fill_uniform(p.fc1_weight, config.concat_dim());
  p.decoder_weight = pca.components.cast<float>();
  p.pca_components = pca.components.cast<float>();
  p.pca_singular_values = pca.singular_values.cast<float>();
  p.pca_mean = pca.mean.cast<float>();
  return p;
}

namespace {

template <typename T>
void CheckBatch(const NetConfig& c, const Matrix<T>& windows,
                const Matrix<T>& conditions) {
  Require(windows.cols() == c.feature_dim, ErrorCode::kParameter,
          "window feature dim " + std::to_string(windows.cols()) +
              " != " + std::to_string(c.feature_dim));
  Require(windows.rows() % c.window == 0 && windows.rows() > 0,
          ErrorCode::kParameter, "window rows are not a multiple of W");
  Require(conditions.rows() == windows.rows() / c.window &&
              conditions.cols() == c.n_subjects,
          ErrorCode::kParameter, "condition batch shape mismatch");
}

}  // namespace

template <typename T>
ForwardCache<T> ForwardBatch(const BasicNetworkParams<T>& params,
                             const Matrix<T>& windows,
                             const Matrix<T>& conditions, Mode mode) {
  const NetConfig& c = params.config;
  CheckBatch(c, windows, conditions);
  const int batch = static_cast<int>(conditions.rows());
  ForwardCache<T> cache;
  cache.batch = batch;

  // Condition appended to every feature row.
  cache.input.resize(windows.rows(), c.input_channels());
  cache.input.leftCols(c.feature_dim) = windows;
  for (int b = 0; b < batch; ++b) {
    for (int r = 0; r < c.window; ++r) {
      cache.input.row(b * c.window + r).rightCols(c.n_subjects) =
          conditions.row(b);
    }
  }

  const Matrix<T>* x = &cache.input;
  int in_len = c.window;
  cache.conv.resize(c.depth());
  if (mode == Mode::kTrain) {
    cache.batch_mean.resize(c.depth());
    cache.batch_var.resize(c.depth());
  }
  for (int l = 0; l < c.depth(); ++l) {
    const auto& layer = params.conv[l];
    auto& lc = cache.conv[l];
    const int cin = c.conv_in_channels(l);
    const int out_len = (in_len + 1) / 2;
    lc.length = out_len;
    lc.cols = Matrix<T>::Zero(static_cast<Eigen::Index>(batch) * out_len,
                              3 * cin);
    for (int b = 0; b < batch; ++b) {
      for (int t = 0; t < out_len; ++t) {
        for (int k = 0; k < 3; ++k) {
          const int src = 2 * t + k - 1;
          if (src < 0 || src >= in_len) continue;
          lc.cols.row(b * out_len + t).segment(k * cin, cin) =
              x->row(b * in_len + src);
        }
      }
    }
    lc.pre = lc.cols * layer.weight;
    lc.pre.rowwise() += layer.bias.transpose();
    const Matrix<T>& pre = lc.pre;

    Vector<T> mean, var;
    if (mode == Mode::kTrain) {
      mean = pre.colwise().mean().transpose();
      var = (pre.rowwise() - mean.transpose())
                .array()
                .square()
                .colwise()
                .mean()
                .transpose();
      cache.batch_mean[l] = mean;
      cache.batch_var[l] = var;
    } else {
      mean = layer.running_mean;
      var = layer.running_var;
    }
    lc.inv_std = (var.array() + static_cast<T>(c.bn_epsilon)).rsqrt();
    lc.normalized = ((pre.rowwise() - mean.transpose()).array().rowwise() *
                     lc.inv_std.transpose().array())
                        .matrix();
    lc.bn_out = ((lc.normalized.array().rowwise() *
                  layer.gamma.transpose().array())
                     .rowwise() +
                 layer.beta.transpose().array())
                    .matrix();
    lc.out = lc.bn_out.cwiseMax(T(0));
    x = &lc.out;
    in_len = out_len;
  }

  // Flatten (time-major, channel-minor) and concatenate the condition again.
  const int flat = c.flat_dim();
  cache.concat.resize(batch, c.concat_dim());
  cache.concat.leftCols(flat) =
      Eigen::Map<const Matrix<T>>(x->data(), batch, flat);
  cache.concat.rightCols(c.n_subjects) = conditions;

  Matrix<T> a1 = cache.concat * params.fc1_weight;
  a1.rowwise() += params.fc1_bias.transpose();
  cache.hidden = a1.array().tanh().matrix();

  cache.encoding = cache.hidden * params.fc2_weight;
  cache.encoding.rowwise() += params.fc2_bias.transpose();

  cache.output = cache.encoding * params.decoder_weight;
  cache.output.rowwise() += params.decoder_bias.transpose();
  return cache;
}

template <typename T>
BasicNetworkParams<T> BackwardBatch(const BasicNetworkParams<T>& params,
                                    const ForwardCache<T>& cache,
                                    const Matrix<T>& d_output, Mode mode) {
  const NetConfig& c = params.config;
  Require(d_output.rows() == cache.batch && d_output.cols() == c.output_dim(),
          ErrorCode::kParameter, "output gradient shape mismatch");
  BasicNetworkParams<T> g = BasicNetworkParams<T>::Zeros(c);
  g.conv.resize(c.depth());
  for (auto& l : g.conv) l.running_var.setZero();

  g.decoder_weight = cache.encoding.transpose() * d_output;
  g.decoder_bias = d_output.colwise().sum().transpose();
  const Matrix<T> d_enc = d_output * params.decoder_weight.transpose();

  g.fc2_weight = cache.hidden.transpose() * d_enc;
  g.fc2_bias = d_enc.colwise().sum().transpose();
  const Matrix<T> d_hidden = d_enc * params.fc2_weight.transpose();
  const Matrix<T> d_a1 =
      (d_hidden.array() * (T(1) - cache.hidden.array().square())).matrix();

  g.fc1_weight = cache.concat.transpose() * d_a1;
  g.fc1_bias = d_a1.colwise().sum().transpose();
  const Matrix<T> d_concat = d_a1 * params.fc1_weight.transpose();

  const int batch = cache.batch;
  const int last = c.depth() - 1;
  Matrix<T> d_out = Eigen::Map<const Matrix<T>>(
      Matrix<T>(d_concat.leftCols(c.flat_dim())).data(),
      static_cast<Eigen::Index>(batch) * cache.conv[last].length,
      c.conv_channels[last]);

  for (int l = last; l >= 0; --l) {
    const auto& lc = cache.conv[l];
    const auto& layer = params.conv[l];
    auto& gl = g.conv[l];
    const Eigen::Index rows = lc.out.rows();

    Matrix<T> d_bn =
        (d_out.array() * (lc.bn_out.array() > T(0)).template cast<T>())
            .matrix();
    gl.gamma = (d_bn.array() * lc.normalized.array())
                   .colwise()
                   .sum()
                   .transpose()
                   .matrix();
    gl.beta = d_bn.colwise().sum().transpose();
    Matrix<T> d_xhat =
        (d_bn.array().rowwise() * layer.gamma.transpose().array()).matrix();

    Matrix<T> d_pre;
    if (mode == Mode::kTrain) {
      const T m = static_cast<T>(rows);
      const Vector<T> sum_dx = d_xhat.colwise().sum().transpose();
      const Vector<T> sum_dx_xhat =
          (d_xhat.array() * lc.normalized.array()).colwise().sum().transpose();
      d_pre = ((((d_xhat.array() * m).rowwise() - sum_dx.transpose().array()) -
                (lc.normalized.array().rowwise() *
                 sum_dx_xhat.transpose().array()))
                   .rowwise() *
               (lc.inv_std.transpose().array() / m))
                  .matrix();
    } else {
      d_pre = (d_xhat.array().rowwise() * lc.inv_std.transpose().array())
                  .matrix();
    }

    gl.weight = lc.cols.transpose() * d_pre;
    gl.bias = d_pre.colwise().sum().transpose();
    if (l == 0) break;

    const Matrix<T> d_cols = d_pre * layer.weight.transpose();
    const int cin = c.conv_in_channels(l);
    const int in_len = cache.conv[l - 1].length;
    Matrix<T> d_in = Matrix<T>::Zero(
        static_cast<Eigen::Index>(batch) * in_len, cin);
    for (int b = 0; b < batch; ++b) {
      for (int t = 0; t < lc.length; ++t) {
        for (int k = 0; k < 3; ++k) {
          const int src = 2 * t + k - 1;
          if (src < 0 || src >= in_len) continue;
          d_in.row(b * in_len + src) +=
              d_cols.row(b * lc.length + t).segment(k * cin, cin);
        }
      }
    }
    d_out = std::move(d_in);
  }
  return g;
}

template <typename T>
void UpdateRunningStats(BasicNetworkParams<T>& params,
                        const ForwardCache<T>& cache, double momentum) {
  Require(cache.batch_mean.size() == params.conv.size(), ErrorCode::kParameter,
          "running statistics need a train-mode forward pass");
  const T m = static_cast<T>(momentum);
  for (size_t l = 0; l < params.conv.size(); ++l) {
    auto& layer = params.conv[l];
    layer.running_mean = m * layer.running_mean + (T(1) - m) * cache.batch_mean[l];
    layer.running_var = m * layer.running_var + (T(1) - m) * cache.batch_var[l];
  }
}

template <typename T>
Vector<T> Encode(const BasicNetworkParams<T>& params, const Matrix<T>& window,
                 const Condition& cond, Mode mode) {
  const NetConfig& c = params.config;
  Require(window.rows() == c.window && window.cols() == c.feature_dim,
          ErrorCode::kParameter, "window must be W x D");
  cond.Validate(c.n_subjects);
  Matrix<T> conds(1, c.n_subjects);
  for (int s = 0; s < c.n_subjects; ++s) {
    conds(0, s) = static_cast<T>(cond.weights[s]);
  }
  return ForwardBatch(params, window, conds, mode).encoding.row(0).transpose();
}

template <typename T>
Matrix<T> Decode(const BasicNetworkParams<T>& params,
                 const Vector<T>& encoding) {
  const NetConfig& c = params.config;
  Require(encoding.size() == c.latent, ErrorCode::kParameter,
          "encoding length " + std::to_string(encoding.size()) +
              " != latent " + std::to_string(c.latent));
  Vector<T> flat = params.decoder_weight.transpose() * encoding +
                   params.decoder_bias;
  return Eigen::Map<const Matrix<T>>(flat.data(), c.n_vertices, 3);
}

template <typename T>
Matrix<T> Forward(const BasicNetworkParams<T>& params, const Matrix<T>& window,
                  const Condition& cond, Mode mode) {
  return Decode(params, Encode(params, window, cond, mode));
}

template <typename T>
std::vector<std::string> ShapeTrace(const ForwardCache<T>& cache,
                                    const NetConfig& config) {
  std::vector<std::string> out;
  out.push_back(std::to_string(config.window) + "x1x" +
                std::to_string(cache.input.cols()));
  for (const auto& lc : cache.conv) {
    out.push_back(std::to_string(lc.length) + "x1x" +
                  std::to_string(lc.out.cols()));
  }
  out.push_back(std::to_string(cache.concat.cols()));
  out.push_back(std::to_string(cache.hidden.cols()));
  out.push_back(std::to_string(cache.encoding.cols()));
  out.push_back(std::to_string(cache.output.cols() / 3) + "x3");
  return out;
}

#define VOCA_INSTANTIATE(T)                                                   \
  template struct BasicNetworkParams<T>;                                      \
  template ForwardCache<T> ForwardBatch(const BasicNetworkParams<T>&,         \
                                        const Matrix<T>&, const Matrix<T>&,   \
                                        Mode);                                \
  template BasicNetworkParams<T> BackwardBatch(                               \
      const BasicNetworkParams<T>&, const ForwardCache<T>&, const Matrix<T>&, \
      Mode);                                                                  \
  template void UpdateRunningStats(BasicNetworkParams<T>&,                    \
                                   const ForwardCache<T>&, double);           \
  template Vector<T> Encode(const BasicNetworkParams<T>&, const Matrix<T>&,   \
                            const Condition&, Mode);                          \
  template Matrix<T> Decode(const BasicNetworkParams<T>&, const Vector<T>&);  \
  template Matrix<T> Forward(const BasicNetworkParams<T>&, const Matrix<T>&,  \
                             const Condition&, Mode);                         \
  template std::vector<std::string> ShapeTrace(const ForwardCache<T>&,        \
                                               const NetConfig&);

VOCA_INSTANTIATE(float)
VOCA_INSTANTIATE(double)
#undef VOCA_INSTANTIATE

template BasicNetworkParams<double> BasicNetworkParams<float>::Cast<double>()
    const;
template BasicNetworkParams<float> BasicNetworkParams<double>::Cast<float>()
    const;
template BasicNetworkParams<float> BasicNetworkParams<float>::Cast<float>()
    const;
template BasicNetworkParams<double> BasicNetworkParams<double>::Cast<double>()
    const;

}  // namespace voca
