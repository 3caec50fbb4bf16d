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

#include "voca/trainer.h"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "voca/error.h"
#include "voca/parallel.h"
#include "voca/random.h"

namespace voca {

namespace {

constexpr int kEvalChunk = 256;

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void RequireSameShape(const Eigen::Ref<const Eigen::MatrixXd>& a,
                      const Eigen::Ref<const Eigen::MatrixXd>& b,
                      const char* what) {
  Require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::kParameter,
          std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
              "x" + std::to_string(b.cols()));
}

template <typename M>
void RequireFinite(const M& m, const std::string& name) {
  if (!m.allFinite()) {
    Fail(ErrorCode::kNumeric, "non-finite values in " + name);
  }
}

// Windows of the given samples (no predecessors), stacked for ForwardBatch.
void StackWindows(const Dataset& dataset,
                  const std::vector<TrainSample>& samples, size_t begin,
                  size_t end, int n_conditions, Matrix<double>& windows,
                  Matrix<double>& conditions) {
  const int w = dataset.window();
  const int n = static_cast<int>(end - begin);
  windows.resize(static_cast<Eigen::Index>(n) * w, dataset.feature_dim());
  conditions = Matrix<double>::Zero(n, n_conditions);
  for (int i = 0; i < n; ++i) {
    const TrainSample& s = samples[begin + i];
    windows.middleRows(static_cast<Eigen::Index>(i) * w, w) =
        dataset.windows(s.sequence)[s.frame].cast<double>();
    if (s.condition >= 0) {
      conditions(i, s.condition) = 1.0;
    } else {
      conditions.row(i).setConstant(1.0 / n_conditions);
    }
  }
}

}  // namespace

void TrainConfig::Validate() const {
  Require(epochs >= 0, ErrorCode::kConfiguration, "epochs must be >= 0");
  Require(learning_rate >= 0.0 && std::isfinite(learning_rate),
          ErrorCode::kConfiguration, "learning_rate must be >= 0");
  Require(batch_size >= 1, ErrorCode::kConfiguration,
          "batch_size must be >= 1");
  Require(loss_weights.position >= 0.0 && loss_weights.velocity >= 0.0,
          ErrorCode::kConfiguration, "loss weights must be >= 0");
  Require(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 &&
              adam.beta2 < 1.0 && adam.epsilon > 0.0,
          ErrorCode::kConfiguration, "invalid Adam hyperparameters");
  Require(bn_momentum >= 0.0 && bn_momentum <= 1.0, ErrorCode::kConfiguration,
          "bn_momentum must lie in [0, 1]");
  Require(max_steps >= 0, ErrorCode::kConfiguration, "max_steps must be >= 0");
}

std::string TrainConfig::Describe() const {
  return "epochs=" + std::to_string(epochs) +
         " learning_rate=" + Num(learning_rate) +
         " batch_size=" + std::to_string(batch_size) +
         " position_weight=" + Num(loss_weights.position) +
         " velocity_weight=" + Num(loss_weights.velocity) +
         " adam_beta1=" + Num(adam.beta1) + " adam_beta2=" + Num(adam.beta2) +
         " adam_epsilon=" + Num(adam.epsilon) +
         " seed=" + std::to_string(seed) +
         " bn_momentum=" + Num(bn_momentum) +
         " bn_population_stats=" + (bn_population_stats ? "1" : "0") +
         " max_steps=" + std::to_string(max_steps);
}

double LossPosition(const Eigen::Ref<const Eigen::MatrixXd>& pred,
                    const Eigen::Ref<const Eigen::MatrixXd>& target) {
  RequireSameShape(pred, target, "position loss");
  return (pred - target).squaredNorm();
}

double LossVelocity(const Eigen::Ref<const Eigen::MatrixXd>& pred_t,
                    const Eigen::Ref<const Eigen::MatrixXd>& pred_prev,
                    const Eigen::Ref<const Eigen::MatrixXd>& target_t,
                    const Eigen::Ref<const Eigen::MatrixXd>& target_prev) {
  RequireSameShape(pred_t, pred_prev, "velocity loss");
  RequireSameShape(pred_t, target_t, "velocity loss");
  RequireSameShape(pred_t, target_prev, "velocity loss");
  return ((target_t - target_prev) - (pred_t - pred_prev)).squaredNorm();
}

Batch AssembleBatch(const Dataset& dataset,
                    const std::vector<TrainSample>& samples,
                    std::span<const int> picks, int n_conditions) {
  Require(!picks.empty(), ErrorCode::kParameter, "empty batch");
  Require(n_conditions >= 1, ErrorCode::kParameter, "no condition slots");
  std::vector<TrainSample> rows;
  rows.reserve(2 * picks.size());
  for (int p : picks) rows.push_back(samples.at(p));
  Batch batch;
  batch.size = static_cast<int>(picks.size());
  batch.previous.assign(batch.size, -1);
  for (int i = 0; i < batch.size; ++i) {
    const TrainSample s = rows[i];
    if (!s.has_previous) continue;
    // The predecessor comes from the same sequence by construction.
    batch.previous[i] = static_cast<int>(rows.size());
    rows.push_back({s.sequence, s.frame - 1, s.condition, s.frame - 1 > 0});
  }
  StackWindows(dataset, rows, 0, rows.size(), n_conditions, batch.windows,
               batch.conditions);
  const int dim = 3 * dataset.n_vertices();
  batch.targets.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (size_t r = 0; r < rows.size(); ++r) {
    const Vertices d = dataset.Displacement(rows[r].sequence, rows[r].frame);
    batch.targets.row(r) = Eigen::Map<const Eigen::RowVectorXd>(d.data(), dim);
    batch.sequence.push_back(rows[r].sequence);
    batch.frame.push_back(rows[r].frame);
  }
  return batch;
}

LossBreakdown TotalLoss(const Matrix<double>& predictions, const Batch& batch,
                        const LossWeights& weights) {
  Require(predictions.rows() == batch.targets.rows() &&
              predictions.cols() == batch.targets.cols(),
          ErrorCode::kParameter, "prediction/target shape mismatch");
  LossBreakdown out;
  for (int i = 0; i < batch.size; ++i) {
    out.position += (predictions.row(i) - batch.targets.row(i)).squaredNorm();
    const int j = batch.previous[i];
    if (j < 0) continue;
    out.velocity += ((batch.targets.row(i) - batch.targets.row(j)) -
                     (predictions.row(i) - predictions.row(j)))
                        .squaredNorm();
    ++out.velocity_pairs;
  }
  out.position /= batch.size;
  if (out.velocity_pairs > 0) out.velocity /= out.velocity_pairs;
  out.total = weights.position * out.position + weights.velocity * out.velocity;
  return out;
}

Matrix<double> TotalLossGradient(const Matrix<double>& predictions,
                                 const Batch& batch,
                                 const LossWeights& weights) {
  Matrix<double> d = Matrix<double>::Zero(predictions.rows(),
                                          predictions.cols());
  int pairs = 0;
  for (int i = 0; i < batch.size; ++i) pairs += batch.previous[i] >= 0;
  const double wp = 2.0 * weights.position / batch.size;
  const double wv = pairs > 0 ? 2.0 * weights.velocity / pairs : 0.0;
  for (int i = 0; i < batch.size; ++i) {
    d.row(i) += wp * (predictions.row(i) - batch.targets.row(i));
    const int j = batch.previous[i];
    if (j < 0) continue;
    const Eigen::RowVectorXd r = (batch.targets.row(i) - batch.targets.row(j)) -
                                 (predictions.row(i) - predictions.row(j));
    d.row(i) -= wv * r;
    d.row(j) += wv * r;
  }
  return d;
}

GradientResult Gradients(const BasicNetworkParams<double>& params,
                         const Batch& batch, const LossWeights& weights) {
  GradientResult out;
  out.cache =
      ForwardBatch(params, batch.windows, batch.conditions, Mode::kTrain);
  for (size_t l = 0; l < out.cache.conv.size(); ++l) {
    RequireFinite(out.cache.conv[l].out,
                  "conv" + std::to_string(l + 1) + " activations");
  }
  RequireFinite(out.cache.hidden, "fc1 activations");
  RequireFinite(out.cache.encoding, "fc2 activations");
  RequireFinite(out.cache.output, "decoder output");
  out.loss = TotalLoss(out.cache.output, batch, weights);
  Require(std::isfinite(out.loss.total), ErrorCode::kNumeric,
          "non-finite loss");
  out.grads = BackwardBatch(params, out.cache,
                            TotalLossGradient(out.cache.output, batch, weights),
                            Mode::kTrain);
  ForEachTensor(out.grads, [](const std::string& name, const auto& t,
                              const std::vector<uint32_t>&, TensorRole role) {
    if (role == TensorRole::kTrainable) RequireFinite(t, "gradient of " + name);
  });
  return out;
}

GradientResult Gradients(const NetworkParams& params, const Batch& batch,
                         const LossWeights& weights) {
  return Gradients(params.Cast<double>(), batch, weights);
}

void AdamStep(std::span<double> params, std::span<const double> grads,
              std::span<double> m, std::span<double> v, int64_t step,
              double learning_rate, const AdamConfig& adam) {
  Require(grads.size() == params.size() && m.size() == params.size() &&
              v.size() == params.size(),
          ErrorCode::kParameter, "Adam state size mismatch");
  Require(step >= 1, ErrorCode::kParameter, "Adam steps count from 1");
  const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(step));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * g;
    v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + adam.epsilon);
  }
}

AdamOptimizer::AdamOptimizer(const NetworkParams& params,
                             const AdamConfig& adam)
    : adam_(adam) {
  ForEachTensor(params, [&](const std::string&, const auto& t,
                            const std::vector<uint32_t>&, TensorRole role) {
    if (role != TensorRole::kTrainable) return;
    m_.emplace_back(t.size(), 0.0);
    v_.emplace_back(t.size(), 0.0);
  });
}

void AdamOptimizer::Step(NetworkParams& params,
                         const BasicNetworkParams<double>& grads,
                         double learning_rate) {
  std::vector<const double*> g;
  ForEachTensor(grads, [&](const std::string&, const auto& t,
                           const std::vector<uint32_t>&, TensorRole role) {
    if (role == TensorRole::kTrainable) g.push_back(t.data());
  });
  Require(g.size() == m_.size(), ErrorCode::kParameter,
          "gradient tensors do not match the optimizer");
  ++step_;
  size_t k = 0;
  std::vector<double> buf;
  ForEachTensor(params, [&](const std::string&, auto& t,
                            const std::vector<uint32_t>&, TensorRole role) {
    if (role != TensorRole::kTrainable) return;
    Require(static_cast<size_t>(t.size()) == m_[k].size(),
            ErrorCode::kParameter, "parameter shape changed");
    buf.assign(t.data(), t.data() + t.size());
    AdamStep(buf, std::span<const double>(g[k], buf.size()), m_[k], v_[k],
             step_, learning_rate, adam_);
    for (size_t i = 0; i < buf.size(); ++i) {
      t.data()[i] = static_cast<float>(buf[i]);
    }
    ++k;
  });
}

LossBreakdown EvaluateLoss(const NetworkParams& params, const Dataset& dataset,
                           const std::vector<TrainSample>& samples,
                           const LossWeights& weights) {
  LossBreakdown out;
  if (samples.empty()) {
    out.position = out.velocity = out.total =
        std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const BasicNetworkParams<double> p = params.Cast<double>();
  double pos_sum = 0.0, vel_sum = 0.0;
  std::vector<int> picks;
  for (size_t begin = 0; begin < samples.size(); begin += kEvalChunk) {
    const size_t end = std::min(samples.size(), begin + kEvalChunk);
    picks.resize(end - begin);
    std::iota(picks.begin(), picks.end(), static_cast<int>(begin));
    const Batch batch =
        AssembleBatch(dataset, samples, picks, params.config.n_subjects);
    const ForwardCache<double> cache =
        ForwardBatch(p, batch.windows, batch.conditions, Mode::kInfer);
    const LossBreakdown l = TotalLoss(cache.output, batch, weights);
    pos_sum += l.position * batch.size;
    vel_sum += l.velocity * l.velocity_pairs;
    out.velocity_pairs += l.velocity_pairs;
  }
  out.position = pos_sum / samples.size();
  out.velocity = out.velocity_pairs > 0 ? vel_sum / out.velocity_pairs : 0.0;
  out.total = weights.position * out.position + weights.velocity * out.velocity;
  return out;
}

void RecomputeBatchNormStats(NetworkParams& params, const Dataset& dataset,
                             const std::vector<TrainSample>& samples) {
  Require(!samples.empty(), ErrorCode::kParameter,
          "batch-norm statistics need at least one sample");
  BasicNetworkParams<double> p = params.Cast<double>();
  Matrix<double> windows, conditions;
  for (size_t l = 0; l < p.conv.size(); ++l) {
    const Eigen::Index channels = p.conv[l].running_mean.size();
    // Shifted sums: subtract the first chunk's mean for stability.
    Eigen::VectorXd shift, sum = Eigen::VectorXd::Zero(channels),
                           sum_sq = Eigen::VectorXd::Zero(channels);
    double count = 0.0;
    for (size_t begin = 0; begin < samples.size(); begin += kEvalChunk) {
      const size_t end = std::min(samples.size(), begin + kEvalChunk);
      StackWindows(dataset, samples, begin, end, p.config.n_subjects, windows,
                   conditions);
      const ForwardCache<double> cache =
          ForwardBatch(p, windows, conditions, Mode::kInfer);
      const Matrix<double>& pre = cache.conv[l].pre;
      if (begin == 0) shift = pre.colwise().mean().transpose();
      const Matrix<double> centered = pre.rowwise() - shift.transpose();
      sum += centered.colwise().sum().transpose();
      sum_sq += centered.array().square().matrix().colwise().sum().transpose();
      count += static_cast<double>(pre.rows());
    }
    const Eigen::VectorXd mean_c = sum / count;
    p.conv[l].running_mean = shift + mean_c;
    p.conv[l].running_var =
        (sum_sq / count - mean_c.cwiseProduct(mean_c)).cwiseMax(0.0);
    params.conv[l].running_mean = p.conv[l].running_mean.cast<float>();
    params.conv[l].running_var = p.conv[l].running_var.cast<float>();
    // Later layers see this layer as it will run at inference.
    p.conv[l].running_mean = params.conv[l].running_mean.cast<double>();
    p.conv[l].running_var = params.conv[l].running_var.cast<double>();
  }
}

PCABasis TrainingPca(const Dataset& dataset, const std::vector<int>& sequences,
                     int k) {
  int rows = 0;
  for (int s : sequences) rows += dataset.sequence(s).meshes.size();
  const int dim = 3 * dataset.n_vertices();
  Eigen::MatrixXd data(rows, dim);
  int r = 0;
  for (int s : sequences) {
    for (int f = 0; f < dataset.sequence(s).meshes.size(); ++f, ++r) {
      const Vertices d = dataset.Displacement(s, f);
      data.row(r) = Eigen::Map<const Eigen::RowVectorXd>(d.data(), dim);
    }
  }
  return ComputePca(data, k);
}

TrainResult Train(const Dataset& dataset, const DatasetSplit& split,
                  const NetConfig& net_config, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.Validate();
  net_config.Validate();
  Require(!split.train.empty(), ErrorCode::kConfiguration,
          "training split is empty");
  Require(net_config.window == dataset.window() &&
              net_config.feature_dim == dataset.feature_dim() &&
              net_config.n_vertices == dataset.n_vertices(),
          ErrorCode::kConfiguration,
          "network window/feature/vertex dimensions do not match the dataset "
          "(" + std::to_string(dataset.window()) + ", " +
              std::to_string(dataset.feature_dim()) + ", " +
              std::to_string(dataset.n_vertices()) + ")");
  Require(net_config.n_subjects ==
              static_cast<int>(split.training_subjects.size()),
          ErrorCode::kConfiguration,
          "n_subjects = " + std::to_string(net_config.n_subjects) + " but " +
              std::to_string(split.training_subjects.size()) +
              " training subjects");

  const PCABasis pca = TrainingPca(dataset, split.train, net_config.latent);
  NetworkParams params = InitParams(net_config, pca,
                                    DeriveSeed(config.seed, "trainer.init"),
                                    split.training_subjects);
  const std::vector<TrainSample> train_samples =
      MakeSamples(dataset, split.train, split.training_subjects);
  const std::vector<TrainSample> val_samples =
      MakeSamples(dataset, split.val, split.training_subjects);

  TrainResult result;
  auto evaluate = [&](int epoch) {
    if (config.bn_population_stats) {
      RecomputeBatchNormStats(params, dataset, train_samples);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.step = result.steps;
    rec.train_loss =
        EvaluateLoss(params, dataset, train_samples, config.loss_weights).total;
    rec.val_loss =
        EvaluateLoss(params, dataset, val_samples, config.loss_weights).total;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    const double metric = val_samples.empty() ? rec.train_loss : rec.val_loss;
    return metric;
  };

  double best = evaluate(0);
  result.best = params;
  AdamOptimizer adam(params, config.adam);
  Rng rng(DeriveSeed(config.seed, "trainer.shuffle"));
  std::vector<int> order(train_samples.size());
  bool stop = config.max_steps > 0 && result.steps >= config.max_steps;
  for (int epoch = 1; epoch <= config.epochs && !stop; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(order);
    for (size_t b = 0; b < order.size() && !stop; b += config.batch_size) {
      const size_t e = std::min(order.size(), b + config.batch_size);
      const Batch batch =
          AssembleBatch(dataset, train_samples,
                        std::span<const int>(order).subspan(b, e - b),
                        net_config.n_subjects);
      const GradientResult g = Gradients(params, batch, config.loss_weights);
      const double m = config.bn_momentum;
      for (size_t l = 0; l < params.conv.size(); ++l) {
        auto& layer = params.conv[l];
        layer.running_mean =
            (m * layer.running_mean.cast<double>() +
             (1.0 - m) * g.cache.batch_mean[l])
                .cast<float>();
        layer.running_var = (m * layer.running_var.cast<double>() +
                             (1.0 - m) * g.cache.batch_var[l])
                                .cast<float>();
      }
      adam.Step(params, g.grads, config.learning_rate);
      ++result.steps;
      stop = config.max_steps > 0 && result.steps >= config.max_steps;
    }
    const double metric = evaluate(epoch);
    if (metric < best) {
      best = metric;
      result.best = params;
      result.best_epoch = epoch;
    }
  }
  result.last = params;
  return result;
}

std::string FormatLogHeader(const NetConfig& net, const TrainConfig& config) {
  std::string channels;
  for (size_t i = 0; i < net.conv_channels.size(); ++i) {
    channels += (i ? "," : "") + std::to_string(net.conv_channels[i]);
  }
  return "# " + config.Describe() + "\n# window=" + std::to_string(net.window) +
         " feature_dim=" + std::to_string(net.feature_dim) +
         " n_subjects=" + std::to_string(net.n_subjects) +
         " conv_channels=" + channels +
         " fc1_units=" + std::to_string(net.fc1_units) +
         " latent=" + std::to_string(net.latent) +
         " n_vertices=" + std::to_string(net.n_vertices) +
         " bn_epsilon=" + Num(net.bn_epsilon) +
         "\nepoch,step,train_loss,val_loss\n";
}

std::string FormatLogLine(const EpochRecord& record) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d,%lld,%.17g,%.17g\n", record.epoch,
                static_cast<long long>(record.step), record.train_loss,
                record.val_loss);
  return buf;
}

}  // namespace voca
