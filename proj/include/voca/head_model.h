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

#ifndef VOCA_HEAD_MODEL_H_
#define VOCA_HEAD_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "voca/mesh_io.h"

namespace voca {

struct Joint {
  std::string name;
  int parent = -1;  // -1 for the root
};

// Parametric head: template, identity and expression blendshapes, and a
// skinned kinematic tree. Blendshape directions are stored as columns of
// 3N x S (resp. 3N x E) matrices in vertex-major xyz order.
struct HeadModel {
  Vertices template_vertices;
  Eigen::MatrixXd shape_basis;
  Eigen::VectorXd shape_sd;
  Eigen::MatrixXd expr_basis;
  std::vector<Joint> joints;
  Eigen::MatrixXd joint_regressor;  // K x N
  Eigen::MatrixXd skin_weights;     // N x K
  std::vector<Face> faces;

  int n_vertices() const { return static_cast<int>(template_vertices.rows()); }
  int n_shape() const { return static_cast<int>(shape_basis.cols()); }
  int n_expr() const { return static_cast<int>(expr_basis.cols()); }
  int n_joints() const { return static_cast<int>(joints.size()); }
  int JointIndex(const std::string& name) const;

  // Throws a format error describing the first violated invariant. Joints
  // must be topologically ordered (parent index below child index).
  void Validate() const;
};

// Axis-angle rotations per joint plus a rigid transform applied last.
struct Pose {
  std::vector<Eigen::Vector3d> joint_rotations;
  Eigen::Vector3d global_rotation = Eigen::Vector3d::Zero();
  Eigen::Vector3d global_translation = Eigen::Vector3d::Zero();

  static Pose Identity(int n_joints);
  bool JointsAtRest() const;
  bool IsIdentity() const;
  bool IsFinite() const;
};

// Exponential map from an axis-angle vector; first-order Taylor expansion
// below 1e-8 rad.
Eigen::Matrix3d Rodrigues(const Eigen::Vector3d& axis_angle);

Vertices ShapeOffsets(const HeadModel& model, std::span<const double> beta);
Vertices ExpressionOffsets(const HeadModel& model, std::span<const double> psi);

// Per-joint world rotation and translation of the skinning transforms, with
// joint centers regressed from `rest`.
struct JointTransforms {
  std::vector<Eigen::Matrix3d> rotation;
  std::vector<Eigen::Vector3d> translation;
};
JointTransforms ComputeJointTransforms(const HeadModel& model,
                                       const Vertices& rest, const Pose& pose);

// Linear blend skinning of zero-pose vertices. The identity pose returns the
// input unchanged.
Vertices PoseMesh(const HeadModel& model, const Vertices& rest,
                  const Pose& pose);

// Exact inverse of PoseMesh. Joint centers depend linearly on the unknown
// rest vertices, so the inverse is a block-diagonal solve plus a 3K x 3K
// correction for the joint term.
Vertices Unpose(const HeadModel& model, const Vertices& posed,
                const Pose& pose);

// PoseMesh(T + shape offsets + expression offsets + displacement, pose).
Vertices Evaluate(const HeadModel& model, std::span<const double> beta,
                  std::span<const double> psi, const Vertices& displacement,
                  const Pose& pose);

// "VHED" container. Layout after the magic: u32 version (1); u32 N, S, E, K,
// F; K joints as (i32 parent, u32 name length, name bytes); then f32 arrays:
// template (N*3), shape basis (S directions of N*3), shape sd (S), expression
// basis (E directions of N*3), joint regressor (K*N), skin weights (N*K);
// then F*3 u32 face indices.
std::vector<char> EncodeHeadModel(const HeadModel& model);
HeadModel DecodeHeadModel(const std::vector<char>& bytes);
void SaveHeadModel(const HeadModel& model, const std::filesystem::path& path);
HeadModel LoadHeadModel(const std::filesystem::path& path);

struct ProceduralHeadSpec {
  int n_vertices = 5023;
  int n_shape = 10;
  int n_expr = 10;
};

// Synthetic ellipsoidal head with the joint set {global, neck, jaw, left_eye,
// right_eye}, smooth blendshapes and soft skin weights. All stored values are
// 32-bit representable so the model round-trips through VHED exactly.
HeadModel MakeProceduralHeadModel(const ProceduralHeadSpec& spec,
                                  uint64_t seed);

// Upper/lower lip vertex pair of a procedural model: the vertices closest to
// points just above and below the mouth corner midline.
std::pair<int, int> ProceduralLipVertices(const HeadModel& model);

}  // namespace voca

#endif  // VOCA_HEAD_MODEL_H_
