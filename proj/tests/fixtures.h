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

#ifndef VOCA_TESTS_FIXTURES_H_
#define VOCA_TESTS_FIXTURES_H_

#include <algorithm>
#include <numeric>
#include <cmath>
#include <string>
#include <vector>

#include "voca/dataset.h"
#include "voca/head_model.h"
#include "voca/net.h"
#include "voca/random.h"
#include "voca/trainer.h"

namespace voca::testing {

// Fills every trainable tensor with small random values (gamma around 1).
template <typename T>
void Randomize(BasicNetworkParams<T>& p, Rng& rng, double scale = 0.3) {
  ForEachTensor(p, [&](const std::string& name, auto& t, const auto&,
                       TensorRole role) {
    if (role != TensorRole::kTrainable) return;
    const bool gamma = name.find("bn_gamma") != std::string::npos;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t.data()[i] = static_cast<T>(gamma ? 1.0 + 0.2 * rng.Normal()
                                         : scale * rng.Normal());
    }
  });
}

struct TensorView {
  std::string name;
  double* data;
  Eigen::Index size;
};

inline std::vector<TensorView> Trainables(BasicNetworkParams<double>& p) {
  std::vector<TensorView> out;
  ForEachTensor(p, [&](const std::string& name, auto& t, const auto&,
                       TensorRole role) {
    if (role == TensorRole::kTrainable) out.push_back({name, t.data(), t.size()});
  });
  return out;
}

struct GradCheck {
  std::string worst_tensor;
  double worst_error = 0.0;  // |analytic - fd| / max(1, |fd|)
  long checked = 0;
};

// Central differences of the train-mode total loss for every trainable
// scalar. `stride` > 1 samples every stride-th element of each tensor.
inline GradCheck FiniteDifferenceCheck(const BasicNetworkParams<double>& params,
                                       const Batch& batch,
                                       const LossWeights& weights, double h,
                                       int stride = 1) {
  const GradientResult g = Gradients(params, batch, weights);
  BasicNetworkParams<double> p = params;
  BasicNetworkParams<double> grads = g.grads;
  const std::vector<TensorView> pv = Trainables(p);
  const std::vector<TensorView> gv = Trainables(grads);
  auto loss = [&] {
    return TotalLoss(ForwardBatch(p, batch.windows, batch.conditions,
                                  Mode::kTrain)
                         .output,
                     batch, weights)
        .total;
  };
  GradCheck out;
  for (size_t t = 0; t < pv.size(); ++t) {
    for (Eigen::Index i = 0; i < pv[t].size; i += stride) {
      const double saved = pv[t].data[i];
      pv[t].data[i] = saved + h;
      const double up = loss();
      pv[t].data[i] = saved - h;
      const double down = loss();
      pv[t].data[i] = saved;
      const double fd = (up - down) / (2 * h);
      const double err =
          std::abs(gv[t].data[i] - fd) / std::max(1.0, std::abs(fd));
      ++out.checked;
      if (err > out.worst_error) {
        out.worst_error = err;
        out.worst_tensor = pv[t].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

// Tiny synthetic corpus shared by several tests.
inline SyntheticSpec SmallSyntheticSpec() {
  SyntheticSpec s;
  s.n_subjects = 2;
  s.n_sentences = 2;
  s.frames_per_sequence = 20;
  s.n_vertices = 30;
  s.feature_dim = 4;
  s.window = 16;
  return s;
}

inline NetConfig ConfigFor(const Dataset& d, int n_subjects) {
  NetConfig c;
  c.window = d.window();
  c.feature_dim = d.feature_dim();
  c.n_subjects = n_subjects;
  c.n_vertices = d.n_vertices();
  return c;
}

struct Eig {
  std::vector<double> values;        // decreasing
  std::vector<Eigen::VectorXd> vectors;
};

// Cyclic Jacobi rotations on a symmetric matrix; plain loops, no solver.
inline Eig JacobiEigen(Eigen::MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i) > a(j, j); });
  Eig e;
  for (int i : order) {
    e.values.push_back(a(i, i));
    e.vectors.push_back(v.col(i));
  }
  return e;
}

// Hand-built model with the reference joint tree. Vertices 0-3 hang off the
// neck chain only; vertex 4 belongs to the global joint.
inline HeadModel ToyHeadModel() {
  HeadModel m;
  m.template_vertices.resize(5, 3);
  m.template_vertices << 0.00, 0.05, 0.02,  //
      0.03, 0.00, 0.04,                      //
      -0.03, -0.02, 0.05,                    //
      0.00, -0.05, 0.03,                     //
      0.00, -0.12, 0.00;
  m.joints = {{"global", -1}, {"neck", 0}, {"jaw", 1}, {"left_eye", 1},
              {"right_eye", 1}};
  m.joint_regressor = Eigen::MatrixXd::Zero(5, 5);
  m.joint_regressor.row(0) << 0, 0, 0, 0, 1;
  m.joint_regressor.row(1) << 0, 0, 0, 0.5, 0.5;
  m.joint_regressor.row(2) << 0, 0, 0.5, 0.5, 0;
  m.joint_regressor.row(3) << 0.5, 0.5, 0, 0, 0;
  m.joint_regressor.row(4) << 0.5, 0, 0.5, 0, 0;
  m.skin_weights = Eigen::MatrixXd::Zero(5, 5);
  m.skin_weights.row(0) << 0, 0.6, 0, 0.2, 0.2;
  m.skin_weights.row(1) << 0, 0.7, 0.1, 0.2, 0;
  m.skin_weights.row(2) << 0, 0.5, 0.5, 0, 0;
  m.skin_weights.row(3) << 0, 0.2, 0.8, 0, 0;
  m.skin_weights.row(4) << 1, 0, 0, 0, 0;
  m.shape_basis.resize(15, 2);
  m.expr_basis.resize(15, 2);
  Rng rng(4);
  for (Eigen::Index i = 0; i < 30; ++i) {
    m.shape_basis.data()[i] = rng.Normal();
    m.expr_basis.data()[i] = rng.Normal();
  }
  m.shape_sd.resize(2);
  m.shape_sd << 0.01, 0.004;
  m.faces = {{0, 1, 2}, {1, 3, 2}, {2, 3, 4}};
  m.Validate();
  return m;
}

// Random axis-angle rotations below max_angle for every joint and the
// global rotation, plus a Gaussian translation.
inline Pose RandomPose(Rng& rng, int k, double max_angle, double translation) {
  Pose p = Pose::Identity(k);
  auto rot = [&]() -> Eigen::Vector3d {
    Eigen::Vector3d axis(rng.Normal(), rng.Normal(), rng.Normal());
    return axis.normalized() * rng.Uniform(0.0, max_angle);
  };
  for (auto& r : p.joint_rotations) r = rot();
  p.global_rotation = rot();
  p.global_translation = translation *
      Eigen::Vector3d(rng.Normal(), rng.Normal(), rng.Normal());
  return p;
}

}  // namespace voca::testing

#endif  // VOCA_TESTS_FIXTURES_H_
