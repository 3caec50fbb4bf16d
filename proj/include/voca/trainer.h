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

#ifndef VOCA_TRAINER_H_
#define VOCA_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "voca/dataset.h"
#include "voca/net.h"

namespace voca {

struct LossWeights {
  double position = 1.0;
  double velocity = 10.0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 1e-4;
  int batch_size = 64;
  LossWeights loss_weights;
  uint64_t seed = 0;
  AdamConfig adam;
  // Exponential average for the batch-norm running statistics.
  double bn_momentum = 0.99;
  // Replace the running statistics with statistics over the whole training
  // split before every evaluation.
  bool bn_population_stats = true;
  // Stop after this many optimizer steps (0 = no limit).
  int64_t max_steps = 0;

  void Validate() const;
  // "epochs=50 learning_rate=0.0001 ..." as echoed in the training log.
  std::string Describe() const;
};

// Squared Frobenius norm of pred - target.
double LossPosition(const Eigen::Ref<const Eigen::MatrixXd>& pred,
                    const Eigen::Ref<const Eigen::MatrixXd>& target);

// Squared Frobenius norm of (target_t - target_prev) - (pred_t - pred_prev).
double LossVelocity(const Eigen::Ref<const Eigen::MatrixXd>& pred_t,
                    const Eigen::Ref<const Eigen::MatrixXd>& pred_prev,
                    const Eigen::Ref<const Eigen::MatrixXd>& target_t,
                    const Eigen::Ref<const Eigen::MatrixXd>& target_prev);

// B frames followed by the predecessor frames they need. Row r of `targets`
// is the flattened (x, y, z per vertex) displacement of frame r.
struct Batch {
  int size = 0;  // B
  Matrix<double> windows;     // (B + P) * W x D
  Matrix<double> conditions;  // (B + P) x S
  Matrix<double> targets;     // (B + P) x 3N
  std::vector<int> previous;  // B entries: row of the predecessor, or -1
  std::vector<int> sequence;  // B + P entries
  std::vector<int> frame;     // B + P entries
};

// Samples with condition -1 use the uniform condition.
Batch AssembleBatch(const Dataset& dataset,
                    const std::vector<TrainSample>& samples,
                    std::span<const int> picks, int n_conditions);

struct LossBreakdown {
  double position = 0.0;  // mean E_p over the B frames
  double velocity = 0.0;  // mean E_v over eligible pairs (0 if none)
  int velocity_pairs = 0;
  double total = 0.0;
};

// `predictions` has one row per batch row (B + P).
LossBreakdown TotalLoss(const Matrix<double>& predictions, const Batch& batch,
                        const LossWeights& weights);
// d total / d predictions.
Matrix<double> TotalLossGradient(const Matrix<double>& predictions,
                                 const Batch& batch,
                                 const LossWeights& weights);

struct GradientResult {
  LossBreakdown loss;
  BasicNetworkParams<double> grads;
  ForwardCache<double> cache;
};

// Train-mode loss and exact gradient (through the batch statistics). A
// non-finite activation or gradient is a numeric error naming the tensor.
GradientResult Gradients(const BasicNetworkParams<double>& params,
                         const Batch& batch, const LossWeights& weights);
GradientResult Gradients(const NetworkParams& params, const Batch& batch,
                         const LossWeights& weights);

// One bias-corrected Adam update of `params` in place; `step` counts from 1.
void AdamStep(std::span<double> params, std::span<const double> grads,
              std::span<double> m, std::span<double> v, int64_t step,
              double learning_rate, const AdamConfig& adam);

// Adam over the trainable tensors of a network, with 64-bit moments.
class AdamOptimizer {
 public:
  AdamOptimizer(const NetworkParams& params, const AdamConfig& adam);
  void Step(NetworkParams& params, const BasicNetworkParams<double>& grads,
            double learning_rate);
  int64_t steps() const { return step_; }

 private:
  AdamConfig adam_;
  int64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Infer-mode total loss over the given samples, evaluated in chunks.
LossBreakdown EvaluateLoss(const NetworkParams& params, const Dataset& dataset,
                           const std::vector<TrainSample>& samples,
                           const LossWeights& weights);

// Sets every running mean/variance to the statistics of the given windows,
// layer by layer in infer mode.
void RecomputeBatchNormStats(NetworkParams& params, const Dataset& dataset,
                             const std::vector<TrainSample>& samples);

// PCA over all training displacements (frames x 3N).
PCABasis TrainingPca(const Dataset& dataset, const std::vector<int>& sequences,
                     int k);

struct EpochRecord {
  int epoch = 0;  // 0 = before training
  int64_t step = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN without a validation split
};

struct TrainResult {
  NetworkParams best;   // lowest validation (or training) loss
  NetworkParams last;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  int64_t steps = 0;
};

// Net config must agree with the dataset (window, feature dim, vertices) and
// with the number of training subjects.
TrainResult Train(const Dataset& dataset, const DatasetSplit& split,
                  const NetConfig& net_config, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

std::string FormatLogHeader(const NetConfig& net, const TrainConfig& config);
std::string FormatLogLine(const EpochRecord& record);

}  // namespace voca

#endif  // VOCA_TRAINER_H_
