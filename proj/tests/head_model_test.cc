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

#include "voca/head_model.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <Eigen/LU>

#include "fixtures.h"
#include "test_util.h"

namespace voca {
namespace {

using testing::CodeOf;
using testing::TempDir;

constexpr double kPi = std::numbers::pi;

using testing::ToyHeadModel;

using testing::RandomPose;

TEST(Rodrigues, KnownRotationsAndSmallAngles) {
  const Eigen::Matrix3d rz = Rodrigues(Eigen::Vector3d(0, 0, kPi / 2));
  EXPECT_NEAR((rz * Eigen::Vector3d(1, 0, 0) - Eigen::Vector3d(0, 1, 0)).norm(),
              0.0, 1e-15);
  EXPECT_EQ(Rodrigues(Eigen::Vector3d::Zero()), Eigen::Matrix3d::Identity());
  const Eigen::Vector3d tiny(1e-10, -2e-10, 3e-10);
  const Eigen::Matrix3d r = Rodrigues(tiny);
  EXPECT_TRUE(r.allFinite());
  EXPECT_NEAR((r * r.transpose() - Eigen::Matrix3d::Identity()).norm(), 0.0,
              1e-15);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d a(rng.Normal(), rng.Normal(), rng.Normal());
    const Eigen::Matrix3d m = Rodrigues(a);
    EXPECT_NEAR((m * m.transpose() - Eigen::Matrix3d::Identity()).norm(), 0,
                1e-13);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-13);
    EXPECT_NEAR((m * a - a).norm(), 0.0, 1e-13);  // axis is fixed
  }
}

TEST(ShapeOffsets, ZeroAndSymmetric) {
  const HeadModel m = ToyHeadModel();
  const std::vector<double> zero = {0, 0};
  EXPECT_TRUE(ShapeOffsets(m, zero).isZero(0.0));
  const std::vector<double> plus = {2, 0}, minus = {-2, 0};
  const Vertices a = ShapeOffsets(m, plus), b = ShapeOffsets(m, minus);
  EXPECT_EQ(a, -b);
  for (Eigen::Index v = 0; v < 5; ++v) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_DOUBLE_EQ(a(v, c), 2 * 0.01 * m.shape_basis(3 * v + c, 0));
    }
  }
}

TEST(ShapeOffsets, Additivity) {
  const HeadModel m = ToyHeadModel();
  const std::vector<double> e1 = {1, 0}, e2 = {0, 1}, both = {1, 1};
  EXPECT_EQ(ShapeOffsets(m, both), ShapeOffsets(m, e1) + ShapeOffsets(m, e2));
}

TEST(ShapeOffsets, LinearityProperty) {
  const HeadModel m = MakeProceduralHeadModel({300, 6, 5}, 3);
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(6), y(6), z(6);
    const double a = rng.Normal(), b = rng.Normal();
    for (int i = 0; i < 6; ++i) {
      x[i] = rng.Normal();
      y[i] = rng.Normal();
      z[i] = a * x[i] + b * y[i];
    }
    const Vertices lhs = ShapeOffsets(m, z);
    const Vertices rhs = a * ShapeOffsets(m, x) + b * ShapeOffsets(m, y);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(ShapeOffsets, LengthMismatch) {
  const HeadModel m = ToyHeadModel();
  const std::vector<double> three = {1, 2, 3};
  EXPECT_EQ(CodeOf([&] { ShapeOffsets(m, three); }), ErrorCode::kParameter);
  EXPECT_EQ(CodeOf([&] { ExpressionOffsets(m, three); }),
            ErrorCode::kParameter);
}

TEST(ExpressionOffsets, ZeroHomogeneityAndOracle) {
  const HeadModel m = ToyHeadModel();
  const std::vector<double> zero = {0, 0};
  EXPECT_TRUE(ExpressionOffsets(m, zero).isZero(0.0));
  const std::vector<double> psi = {0.7, -1.3}, scaled = {2 * 0.7, 2 * -1.3};
  EXPECT_EQ(ExpressionOffsets(m, scaled), 2.0 * ExpressionOffsets(m, psi));
  const Vertices e = ExpressionOffsets(m, psi);
  for (int v = 0; v < 5; ++v) {
    for (int c = 0; c < 3; ++c) {
      const double want = psi[0] * m.expr_basis(3 * v + c, 0) +
                          psi[1] * m.expr_basis(3 * v + c, 1);
      EXPECT_NEAR(e(v, c), want, 1e-12);
    }
  }
}

TEST(PoseMesh, IdentityIsExact) {
  const HeadModel m = MakeProceduralHeadModel({500, 2, 2}, 1);
  const Vertices v = m.template_vertices;
  EXPECT_EQ(PoseMesh(m, v, Pose::Identity(m.n_joints())), v);
  EXPECT_EQ(Unpose(m, v, Pose::Identity(m.n_joints())), v);
}

TEST(PoseMesh, SingleJointQuarterTurn) {
  HeadModel m;
  m.template_vertices.resize(1, 3);
  m.template_vertices << 1, 0, 0;
  m.joints = {{"root", -1}};
  m.joint_regressor = Eigen::MatrixXd::Zero(1, 1);  // joint at the origin
  m.skin_weights = Eigen::MatrixXd::Ones(1, 1);
  m.shape_basis.resize(3, 0);
  m.expr_basis.resize(3, 0);
  m.Validate();
  Pose p = Pose::Identity(1);
  p.joint_rotations[0] = Eigen::Vector3d(0, 0, kPi / 2);
  const Vertices out = PoseMesh(m, m.template_vertices, p);
  EXPECT_NEAR(out(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(out(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(out(0, 2), 0.0, 1e-12);
}

TEST(PoseMesh, NeckYawRotatesTheNeckChainRigidly) {
  const HeadModel m = ToyHeadModel();
  const Vertices& v = m.template_vertices;
  const Eigen::Vector3d neck =
      (m.joint_regressor.row(1) * v).transpose();
  for (double deg : {-30.0, 30.0}) {
    Pose p = Pose::Identity(5);
    p.joint_rotations[1] = Eigen::Vector3d(0, deg * kPi / 180, 0);
    const Eigen::Matrix3d r = Rodrigues(p.joint_rotations[1]);
    const Vertices out = PoseMesh(m, v, p);
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector3d want = r * (v.row(i).transpose() - neck) + neck;
      EXPECT_NEAR((out.row(i).transpose() - want).norm(), 0.0, 1e-12);
    }
    EXPECT_EQ(out.row(4), v.row(4));
  }
}

TEST(PoseMesh, TranslationEquivarianceWithoutRotation) {
  const HeadModel m = MakeProceduralHeadModel({200, 0, 0}, 5);
  Pose p = Pose::Identity(m.n_joints());
  p.global_translation = Eigen::Vector3d(0.1, -0.2, 0.3);
  const Vertices out = PoseMesh(m, m.template_vertices, p);
  const Vertices want =
      m.template_vertices.rowwise() + p.global_translation.transpose();
  EXPECT_LT((out - want).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(PoseMesh, NonFinitePose) {
  const HeadModel m = ToyHeadModel();
  Pose p = Pose::Identity(5);
  p.joint_rotations[2].x() = std::nan("");
  EXPECT_EQ(CodeOf([&] { PoseMesh(m, m.template_vertices, p); }),
            ErrorCode::kParameter);
  p = Pose::Identity(4);
  EXPECT_EQ(CodeOf([&] { PoseMesh(m, m.template_vertices, p); }),
            ErrorCode::kParameter);
}

TEST(Unpose, PureTranslation) {
  const HeadModel m = ToyHeadModel();
  Pose p = Pose::Identity(5);
  p.global_translation = Eigen::Vector3d(0.5, 0.25, -1.0);
  const Vertices out = Unpose(m, m.template_vertices, p);
  const Vertices want =
      m.template_vertices.rowwise() - p.global_translation.transpose();
  EXPECT_EQ(out, want);
}

TEST(Unpose, RoundTripToy) {
  const HeadModel m = ToyHeadModel();
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const Pose p = RandomPose(rng, 5, 1.0, 0.1);
    const Vertices back = Unpose(m, PoseMesh(m, m.template_vertices, p), p);
    EXPECT_LT((back - m.template_vertices).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Unpose, RoundTripProcedural) {
  const HeadModel m = MakeProceduralHeadModel({1000, 4, 4}, 2);
  Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    const Pose p = RandomPose(rng, m.n_joints(), 1.0, 0.05);
    const Vertices back = Unpose(m, PoseMesh(m, m.template_vertices, p), p);
    EXPECT_LT((back - m.template_vertices).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Unpose, GlobalRotationIsRemovedRegardlessOfItsValue) {
  const HeadModel m = ToyHeadModel();
  Rng rng(14);
  Pose base = RandomPose(rng, 5, 0.8, 0.0);
  base.global_rotation.setZero();
  for (int t = 0; t < 20; ++t) {
    Pose p = base;
    p.global_rotation = Eigen::Vector3d(rng.Normal(), rng.Normal(),
                                        rng.Normal()).normalized() *
                        rng.Uniform(0, 3.0);
    const Vertices back = Unpose(m, PoseMesh(m, m.template_vertices, p), p);
    EXPECT_LT((back - m.template_vertices).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Unpose, SingularBlendIsANumericError) {
  HeadModel m;
  m.template_vertices.resize(2, 3);
  m.template_vertices << 1, 0, 0, -1, 0, 0;
  m.joints = {{"root", -1}, {"a", 0}};
  m.joint_regressor = Eigen::MatrixXd::Zero(2, 2);
  m.skin_weights.resize(2, 2);
  m.skin_weights << 0.5, 0.5, 1, 0;
  m.shape_basis.resize(6, 0);
  m.expr_basis.resize(6, 0);
  m.Validate();
  Pose p = Pose::Identity(2);
  p.joint_rotations[1] = Eigen::Vector3d(0, 0, kPi);  // halfway blend is rank 1
  EXPECT_EQ(CodeOf([&] { Unpose(m, m.template_vertices, p); }),
            ErrorCode::kNumeric);
}

TEST(Evaluate, CompositionOracle) {
  const HeadModel m = ToyHeadModel();
  Rng rng(15);
  const std::vector<double> beta = {0.3, -1.1}, psi = {0.8, 0.2};
  Vertices disp(5, 3);
  for (Eigen::Index i = 0; i < 15; ++i) disp.data()[i] = 0.01 * rng.Normal();
  const Pose p = RandomPose(rng, 5, 0.5, 0.02);

  Vertices rest = m.template_vertices;
  for (int v = 0; v < 5; ++v) {
    for (int c = 0; c < 3; ++c) {
      rest(v, c) += beta[0] * m.shape_sd[0] * m.shape_basis(3 * v + c, 0) +
                    beta[1] * m.shape_sd[1] * m.shape_basis(3 * v + c, 1) +
                    psi[0] * m.expr_basis(3 * v + c, 0) +
                    psi[1] * m.expr_basis(3 * v + c, 1) + disp(v, c);
    }
  }
  const Vertices want = PoseMesh(m, rest, p);
  EXPECT_LT((Evaluate(m, beta, psi, disp, p) - want).cwiseAbs().maxCoeff(),
            1e-12);

  const std::vector<double> z = {0, 0};
  const Vertices zero = Vertices::Zero(5, 3);
  EXPECT_EQ(Evaluate(m, z, z, zero, Pose::Identity(5)), m.template_vertices);
  EXPECT_EQ(Evaluate(m, z, z, disp, Pose::Identity(5)),
            m.template_vertices + disp);
}

TEST(HeadModelContainer, RoundTripIsExact) {
  TempDir dir;
  const HeadModel m = MakeProceduralHeadModel({400, 3, 2}, 9);
  SaveHeadModel(m, dir / "h.vhed");
  const HeadModel b = LoadHeadModel(dir / "h.vhed");
  EXPECT_EQ(b.template_vertices, m.template_vertices);
  EXPECT_EQ(b.shape_basis, m.shape_basis);
  EXPECT_EQ(b.shape_sd, m.shape_sd);
  EXPECT_EQ(b.expr_basis, m.expr_basis);
  EXPECT_EQ(b.joint_regressor, m.joint_regressor);
  EXPECT_EQ(b.skin_weights, m.skin_weights);
  EXPECT_EQ(b.faces, m.faces);
  ASSERT_EQ(b.joints.size(), m.joints.size());
  for (size_t j = 0; j < m.joints.size(); ++j) {
    EXPECT_EQ(b.joints[j].name, m.joints[j].name);
    EXPECT_EQ(b.joints[j].parent, m.joints[j].parent);
  }
  EXPECT_EQ(EncodeHeadModel(b), EncodeHeadModel(m));
}

TEST(HeadModelContainer, TruncationAndMagic) {
  const std::vector<char> bytes = EncodeHeadModel(ToyHeadModel());
  EXPECT_EQ(std::string(bytes.data(), 4), "VHED");
  for (size_t n : {size_t{0}, size_t{3}, size_t{10}, bytes.size() / 2,
                   bytes.size() - 1}) {
    std::vector<char> cut(bytes.begin(), bytes.begin() + n);
    EXPECT_EQ(CodeOf([&] { DecodeHeadModel(cut); }), ErrorCode::kFormat);
  }
  std::vector<char> bad = bytes;
  bad[1] = 'X';
  EXPECT_EQ(CodeOf([&] { DecodeHeadModel(bad); }), ErrorCode::kFormat);
}

TEST(HeadModel, ValidateRejectsBrokenModels) {
  HeadModel m = ToyHeadModel();
  m.skin_weights(0, 1) += 0.01;
  EXPECT_EQ(CodeOf([&] { m.Validate(); }), ErrorCode::kFormat);
  m = ToyHeadModel();
  m.joints[2].parent = 3;
  EXPECT_EQ(CodeOf([&] { m.Validate(); }), ErrorCode::kFormat);
  m = ToyHeadModel();
  m.skin_weights(4, 0) = -0.5;
  m.skin_weights(4, 1) = 1.5;
  EXPECT_EQ(CodeOf([&] { m.Validate(); }), ErrorCode::kFormat);
}

TEST(ProceduralHead, ReferenceShape) {
  const HeadModel m = MakeProceduralHeadModel({}, 0);
  EXPECT_EQ(m.n_vertices(), 5023);
  EXPECT_EQ(m.n_joints(), 5);
  EXPECT_EQ(m.JointIndex("jaw"), 2);
  EXPECT_EQ(m.joints[m.JointIndex("left_eye")].parent, m.JointIndex("neck"));
  for (Eigen::Index v = 0; v < m.skin_weights.rows(); ++v) {
    EXPECT_NEAR(m.skin_weights.row(v).sum(), 1.0, 1e-6);
  }
  const auto [upper, lower] = ProceduralLipVertices(m);
  EXPECT_GT(m.template_vertices(upper, 1), m.template_vertices(lower, 1));
  EXPECT_EQ(CodeOf([&] { m.JointIndex("tail"); }), ErrorCode::kParameter);
}

}  // namespace
}  // namespace voca
