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

#include <Eigen/SVD>

#include "voca/error.h"
#include "voca/net.h"

namespace voca {

PCABasis ComputePca(const Eigen::MatrixXd& data, int k) {
  Require(k >= 1, ErrorCode::kParameter, "PCA needs k >= 1");
  Require(data.rows() >= k, ErrorCode::kInsufficientData,
          "PCA needs at least " + std::to_string(k) + " samples, got " +
              std::to_string(data.rows()));
  Require(data.cols() >= k, ErrorCode::kParameter,
          "PCA dimension smaller than k");
  PCABasis pca;
  pca.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - pca.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  pca.singular_values = svd.singularValues().head(k);
  pca.components = svd.matrixV().leftCols(k).transpose();
  for (int i = 0; i < k; ++i) {
    Eigen::Index arg;
    pca.components.row(i).cwiseAbs().maxCoeff(&arg);
    if (pca.components(i, arg) < 0) pca.components.row(i) *= -1.0;
  }
  return pca;
}

}  // namespace voca
