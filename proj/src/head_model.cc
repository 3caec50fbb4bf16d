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
#include <string>

#include <Eigen/Dense>

#include "voca/binary_io.h"
#include "voca/error.h"
#include "voca/random.h"

namespace voca {
namespace {

constexpr uint32_t kHeadModelVersion = 1;

Vertices OffsetsFromBasis(const Eigen::MatrixXd& basis,
                          std::span<const double> coeffs,
                          const Eigen::VectorXd* scale, int n_vertices,
                          const char* what) {
  Require(static_cast<Eigen::Index>(coeffs.size()) == basis.cols(),
          ErrorCode::kParameter,
          std::string(what) + ": expected " + std::to_string(basis.cols()) +
              " coefficients, got " + std::to_string(coeffs.size()));
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(basis.rows());
  for (Eigen::Index s = 0; s < basis.cols(); ++s) {
    double w = coeffs[s] * (scale ? (*scale)[s] : 1.0);
    flat += w * basis.col(s);
  }
  return Eigen::Map<const Vertices>(flat.data(), n_vertices, 3);
}

Eigen::Matrix3d Skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d k;
  k << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return k;
}

}  // namespace

int HeadModel::JointIndex(const std::string& name) const {
  for (size_t k = 0; k < joints.size(); ++k) {
    if (joints[k].name == name) return static_cast<int>(k);
  }
  Fail(ErrorCode::kParameter, "unknown joint '" + name + "'");
}

void HeadModel::Validate() const {
  const Eigen::Index n = template_vertices.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(joints.size());
  Require(n >= 1, ErrorCode::kFormat, "head model has no vertices");
  Require(shape_basis.rows() == 3 * n && expr_basis.rows() == 3 * n,
          ErrorCode::kFormat, "blendshape basis row count != 3N");
  Require(shape_sd.size() == shape_basis.cols(), ErrorCode::kFormat,
          "shape sd count != shape basis count");
  Require(k >= 1, ErrorCode::kFormat, "head model has no joints");
  Require(joint_regressor.rows() == k && joint_regressor.cols() == n,
          ErrorCode::kFormat, "joint regressor must be K x N");
  Require(skin_weights.rows() == n && skin_weights.cols() == k,
          ErrorCode::kFormat, "skin weights must be N x K");
  Require(joints[0].parent == -1, ErrorCode::kFormat,
          "joint 0 must be the root");
  for (Eigen::Index j = 1; j < k; ++j) {
    Require(joints[j].parent >= 0 && joints[j].parent < j, ErrorCode::kFormat,
            "joint " + std::to_string(j) +
                " must have a parent with a lower index");
  }
  for (Eigen::Index v = 0; v < n; ++v) {
    Require((skin_weights.row(v).array() >= 0.0).all(), ErrorCode::kFormat,
            "negative skin weight at vertex " + std::to_string(v));
    Require(std::abs(skin_weights.row(v).sum() - 1.0) <= 1e-6,
            ErrorCode::kFormat,
            "skin weights of vertex " + std::to_string(v) + " do not sum to 1");
  }
  for (const Face& f : faces) {
    for (uint32_t v : f) {
      Require(v < n, ErrorCode::kFormat, "face index out of range");
    }
  }
}

Pose Pose::Identity(int n_joints) {
  Pose p;
  p.joint_rotations.assign(n_joints, Eigen::Vector3d::Zero());
  return p;
}

bool Pose::JointsAtRest() const {
  for (const auto& r : joint_rotations) {
    if (!r.isZero(0.0)) return false;
  }
  return true;
}

bool Pose::IsIdentity() const {
  return JointsAtRest() && global_rotation.isZero(0.0) &&
         global_translation.isZero(0.0);
}

bool Pose::IsFinite() const {
  for (const auto& r : joint_rotations) {
    if (!r.allFinite()) return false;
  }
  return global_rotation.allFinite() && global_translation.allFinite();
}

Eigen::Matrix3d Rodrigues(const Eigen::Vector3d& axis_angle) {
  const double theta = axis_angle.norm();
  if (theta < 1e-8) {
    return Eigen::Matrix3d::Identity() + Skew(axis_angle);
  }
  const Eigen::Matrix3d k = Skew(axis_angle / theta);
  return Eigen::Matrix3d::Identity() + std::sin(theta) * k +
         (1.0 - std::cos(theta)) * k * k;
}

Vertices ShapeOffsets(const HeadModel& model, std::span<const double> beta) {
  return OffsetsFromBasis(model.shape_basis, beta, &model.shape_sd,
                          model.n_vertices(), "shape offsets");
}

Vertices ExpressionOffsets(const HeadModel& model,
                           std::span<const double> psi) {
  return OffsetsFromBasis(model.expr_basis, psi, nullptr, model.n_vertices(),
                          "expression offsets");
}

namespace {

void CheckPose(const HeadModel& model, const Pose& pose) {
  Require(static_cast<int>(pose.joint_rotations.size()) == model.n_joints(),
          ErrorCode::kParameter,
          "pose has " + std::to_string(pose.joint_rotations.size()) +
              " joint rotations, model has " +
              std::to_string(model.n_joints()) + " joints");
  Require(pose.IsFinite(), ErrorCode::kParameter, "pose is not finite");
}

void CheckVertices(const HeadModel& model, const Vertices& v) {
  Require(v.rows() == model.n_vertices(), ErrorCode::kParameter,
          "vertex count " + std::to_string(v.rows()) + " != model " +
              std::to_string(model.n_vertices()));
}

}  // namespace

JointTransforms ComputeJointTransforms(const HeadModel& model,
                                       const Vertices& rest,
                                       const Pose& pose) {
  const int k = model.n_joints();
  const Eigen::MatrixXd centers = model.joint_regressor * rest;  // K x 3
  JointTransforms out;
  out.rotation.resize(k);
  out.translation.resize(k);
  std::vector<Eigen::Vector3d> posed(k);
  for (int j = 0; j < k; ++j) {
    const Eigen::Vector3d c = centers.row(j).transpose();
    const Eigen::Matrix3d local = Rodrigues(pose.joint_rotations[j]);
    const int p = model.joints[j].parent;
    if (p < 0) {
      out.rotation[j] = local;
      posed[j] = c;
    } else {
      const Eigen::Vector3d cp = centers.row(p).transpose();
      out.rotation[j] = out.rotation[p] * local;
      posed[j] = posed[p] + out.rotation[p] * (c - cp);
    }
    out.translation[j] = posed[j] - out.rotation[j] * c;
  }
  return out;
}

Vertices PoseMesh(const HeadModel& model, const Vertices& rest,
                  const Pose& pose) {
  CheckVertices(model, rest);
  CheckPose(model, pose);
  if (pose.IsIdentity()) return rest;

  Vertices skinned = rest;
  if (!pose.JointsAtRest()) {
    const JointTransforms xf = ComputeJointTransforms(model, rest, pose);
    for (Eigen::Index v = 0; v < rest.rows(); ++v) {
      const Eigen::Vector3d x = rest.row(v).transpose();
      Eigen::Vector3d acc = Eigen::Vector3d::Zero();
      for (int j = 0; j < model.n_joints(); ++j) {
        const double w = model.skin_weights(v, j);
        if (w == 0.0) continue;
        acc += w * (xf.rotation[j] * x + xf.translation[j]);
      }
      skinned.row(v) = acc.transpose();
    }
  }
  const Eigen::Matrix3d rg = Rodrigues(pose.global_rotation);
  Vertices out(rest.rows(), 3);
  for (Eigen::Index v = 0; v < rest.rows(); ++v) {
    out.row(v) =
        (rg * skinned.row(v).transpose() + pose.global_translation)
            .transpose();
  }
  return out;
}

Vertices Unpose(const HeadModel& model, const Vertices& posed,
                const Pose& pose) {
  CheckVertices(model, posed);
  CheckPose(model, pose);
  if (pose.IsIdentity()) return posed;

  const Eigen::Index n = posed.rows();
  const Eigen::Matrix3d rg_t = Rodrigues(pose.global_rotation).transpose();
  Vertices skinned(n, 3);
  for (Eigen::Index v = 0; v < n; ++v) {
    skinned.row(v) =
        (rg_t * (posed.row(v).transpose() - pose.global_translation))
            .transpose();
  }
  if (pose.JointsAtRest()) return skinned;

  // Posed joint positions and skinning translations are linear in the stacked
  // rest joint centers J (3K): p_k = P_k J, t_k = T_k J. Rotations do not
  // depend on J.
  const int k = model.n_joints();
  const int dim = 3 * k;
  std::vector<Eigen::Matrix3d> rot(k);
  std::vector<Eigen::MatrixXd> pos_coef(k), trans_coef(k);
  auto select = [&](int j) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(3, dim);
    e.block<3, 3>(0, 3 * j).setIdentity();
    return e;
  };
  for (int j = 0; j < k; ++j) {
    const Eigen::Matrix3d local = Rodrigues(pose.joint_rotations[j]);
    const int p = model.joints[j].parent;
    if (p < 0) {
      rot[j] = local;
      pos_coef[j] = select(j);
    } else {
      rot[j] = rot[p] * local;
      pos_coef[j] = pos_coef[p] + rot[p] * (select(j) - select(p));
    }
    trans_coef[j] = pos_coef[j] - rot[j] * select(j);
  }

  // Per vertex: skinned_v = B_v rest_v + U_v J, J = sum_v (reg_v (x) I3)
  // rest_v. Eliminating rest_v gives (I + sum reg B^-1 U) J = sum reg B^-1 s.
  std::vector<Eigen::Matrix3d> b_inv(n);
  std::vector<Eigen::MatrixXd> u(n);
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index v = 0; v < n; ++v) {
    Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
    u[v] = Eigen::MatrixXd::Zero(3, dim);
    for (int j = 0; j < k; ++j) {
      const double w = model.skin_weights(v, j);
      if (w == 0.0) continue;
      b += w * rot[j];
      u[v] += w * trans_coef[j];
    }
    const double det = b.determinant();
    if (!(std::abs(det) > 1e-12)) {
      Fail(ErrorCode::kNumeric,
           "blended skinning transform of vertex " + std::to_string(v) +
               " is singular");
    }
    b_inv[v] = b.inverse();
    const Eigen::MatrixXd bu = b_inv[v] * u[v];
    const Eigen::Vector3d bs = b_inv[v] * skinned.row(v).transpose();
    for (int j = 0; j < k; ++j) {
      const double r = model.joint_regressor(j, v);
      if (r == 0.0) continue;
      system.middleRows(3 * j, 3) += r * bu;
      rhs.segment<3>(3 * j) += r * bs;
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) {
    Fail(ErrorCode::kNumeric, "joint-center system is singular");
  }
  const Eigen::VectorXd centers = lu.solve(rhs);

  Vertices rest(n, 3);
  for (Eigen::Index v = 0; v < n; ++v) {
    rest.row(v) =
        (b_inv[v] * (skinned.row(v).transpose() - u[v] * centers)).transpose();
  }
  return rest;
}

Vertices Evaluate(const HeadModel& model, std::span<const double> beta,
                  std::span<const double> psi, const Vertices& displacement,
                  const Pose& pose) {
  CheckVertices(model, displacement);
  Vertices rest = model.template_vertices + ShapeOffsets(model, beta) +
                  ExpressionOffsets(model, psi) + displacement;
  return PoseMesh(model, rest, pose);
}

std::vector<char> EncodeHeadModel(const HeadModel& model) {
  model.Validate();
  ByteWriter out;
  out.Magic("VHED");
  out.U32(kHeadModelVersion);
  out.U32(static_cast<uint32_t>(model.n_vertices()));
  out.U32(static_cast<uint32_t>(model.n_shape()));
  out.U32(static_cast<uint32_t>(model.n_expr()));
  out.U32(static_cast<uint32_t>(model.n_joints()));
  out.U32(static_cast<uint32_t>(model.faces.size()));
  for (const Joint& j : model.joints) {
    out.I32(j.parent);
    out.String(j.name);
  }
  auto put_rowmajor = [&](const auto& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        out.F32(static_cast<float>(m(r, c)));
      }
    }
  };
  put_rowmajor(model.template_vertices);
  // Each direction is written as one contiguous N*3 block.
  put_rowmajor(model.shape_basis.transpose());
  put_rowmajor(model.shape_sd.transpose());
  put_rowmajor(model.expr_basis.transpose());
  put_rowmajor(model.joint_regressor);
  put_rowmajor(model.skin_weights);
  for (const Face& f : model.faces) {
    for (uint32_t v : f) out.U32(v);
  }
  return out.buffer();
}

HeadModel DecodeHeadModel(const std::vector<char>& bytes) {
  ByteReader in(bytes, "head model");
  in.ExpectMagic("VHED");
  uint32_t version = in.U32();
  Require(version == kHeadModelVersion, ErrorCode::kFormat,
          "head model version " + std::to_string(version));
  const uint32_t n = in.U32(), s = in.U32(), e = in.U32(), k = in.U32(),
                 f = in.U32();
  Require(n >= 1 && k >= 1, ErrorCode::kFormat,
          "head model needs vertices and joints");
  const size_t payload =
      4ull * (3ull * n + 3ull * n * s + s + 3ull * n * e + 2ull * k * n +
              3ull * f);
  // Joint names are variable length; check the fixed part after reading them.
  HeadModel model;
  model.joints.resize(k);
  for (auto& j : model.joints) {
    j.parent = in.I32();
    j.name = in.String();
  }
  Require(in.remaining() == payload, ErrorCode::kFormat,
          "head model payload size mismatch");
  auto get_rowmajor = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = in.F32();
    }
    return m;
  };
  model.template_vertices = get_rowmajor(n, 3);
  model.shape_basis = get_rowmajor(s, 3 * n).transpose();
  model.shape_sd = get_rowmajor(1, s).transpose();
  model.expr_basis = get_rowmajor(e, 3 * n).transpose();
  model.joint_regressor = get_rowmajor(k, n);
  model.skin_weights = get_rowmajor(n, k);
  model.faces.resize(f);
  for (Face& face : model.faces) {
    for (uint32_t& v : face) v = in.U32();
  }
  model.Validate();
  return model;
}

void SaveHeadModel(const HeadModel& model, const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeHeadModel(model));
}

HeadModel LoadHeadModel(const std::filesystem::path& path) {
  return DecodeHeadModel(ReadFileBytes(path));
}

namespace {

// Ellipsoid semi-axes (x: width, y: height, z: depth), meters.
const Eigen::Vector3d kHeadAxes(0.075, 0.11, 0.09);

Eigen::Vector3d FrontSurfacePoint(double x, double y) {
  double r = 1.0 - (x / kHeadAxes.x()) * (x / kHeadAxes.x()) -
             (y / kHeadAxes.y()) * (y / kHeadAxes.y());
  return {x, y, kHeadAxes.z() * std::sqrt(std::max(r, 0.0))};
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int NearestVertex(const Vertices& v, const Eigen::Vector3d& p) {
  Eigen::Index best;
  (v.rowwise() - p.transpose()).rowwise().squaredNorm().minCoeff(&best);
  return static_cast<int>(best);
}

Eigen::MatrixXd SmoothBasis(const Vertices& verts, int count, Rng& rng,
                            const Eigen::VectorXd& locality) {
  const Eigen::Index n = verts.rows();
  Eigen::MatrixXd basis(3 * n, count);
  for (int s = 0; s < count; ++s) {
    Eigen::Matrix<double, 3, 10> coef;
    for (int i = 0; i < coef.size(); ++i) coef.data()[i] = rng.Normal();
    for (Eigen::Index v = 0; v < n; ++v) {
      const double x = verts(v, 0) * 10, y = verts(v, 1) * 10,
                   z = verts(v, 2) * 10;
      Eigen::Matrix<double, 10, 1> feat;
      feat << 1, x, y, z, x * x, y * y, z * z, x * y, y * z, x * z;
      basis.block<3, 1>(3 * v, s) = locality[v] * (coef * feat);
    }
    basis.col(s).normalize();
  }
  return basis.cast<float>().cast<double>();
}

}  // namespace

HeadModel MakeProceduralHeadModel(const ProceduralHeadSpec& spec,
                                  uint64_t seed) {
  Require(spec.n_vertices >= 8, ErrorCode::kParameter,
          "procedural head needs at least 8 vertices");
  Require(spec.n_shape >= 0 && spec.n_expr >= 0, ErrorCode::kParameter,
          "negative blendshape count");
  const int n = spec.n_vertices;
  Rng rng(seed);
  HeadModel model;

  // Spiral from the crown downwards; `turn` vertices per revolution so vertex
  // i + turn lies directly below vertex i.
  const int turn = std::max(
      3, static_cast<int>(std::lround(std::sqrt(std::numbers::pi * n))));
  model.template_vertices.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    const double theta = std::acos(1.0 - 2.0 * t);
    const double phi = 2.0 * std::numbers::pi * i / turn;
    model.template_vertices.row(i) << kHeadAxes.x() * std::sin(theta) *
                                          std::cos(phi),
        kHeadAxes.y() * std::cos(theta),
        kHeadAxes.z() * std::sin(theta) * std::sin(phi);
  }
  model.template_vertices = RoundToFloat(model.template_vertices);
  for (int i = 0; i + turn + 1 < n; ++i) {
    const auto a = static_cast<uint32_t>(i);
    const auto t = static_cast<uint32_t>(turn);
    model.faces.push_back({a, a + t, a + 1});
    model.faces.push_back({a + 1, a + t, a + t + 1});
  }

  model.joints = {{"global", -1},
                  {"neck", 0},
                  {"jaw", 1},
                  {"left_eye", 1},
                  {"right_eye", 1}};
  const std::vector<Eigen::Vector3d> anchors = {
      {0.0, -0.10, -0.01},
      {0.0, -0.06, -0.01},
      {0.0, -0.02, 0.02},
      FrontSurfacePoint(0.03, 0.03),
      FrontSurfacePoint(-0.03, 0.03)};
  const int k = static_cast<int>(anchors.size());
  const Vertices& tv = model.template_vertices;

  model.joint_regressor.resize(k, n);
  for (int j = 0; j < k; ++j) {
    for (int v = 0; v < n; ++v) {
      const double d2 = (tv.row(v).transpose() - anchors[j]).squaredNorm();
      model.joint_regressor(j, v) = std::exp(-d2 / (2.0 * 0.03 * 0.03));
    }
    model.joint_regressor.row(j) /= model.joint_regressor.row(j).sum();
  }
  model.joint_regressor = model.joint_regressor.cast<float>().cast<double>();

  model.skin_weights.resize(n, k);
  for (int v = 0; v < n; ++v) {
    const double x = tv(v, 0), y = tv(v, 1), z = tv(v, 2);
    Eigen::VectorXd a(k);
    a[0] = Sigmoid((-0.08 - y) / 0.008);
    a[1] = 1.0;
    a[2] = 2.0 * Sigmoid((-0.025 - y) / 0.006) * Sigmoid(z / 0.02);
    for (int eye = 3; eye < 5; ++eye) {
      const double d2 = (Eigen::Vector3d(x, y, z) - anchors[eye]).squaredNorm();
      a[eye] = 4.0 * std::exp(-d2 / (2.0 * 0.008 * 0.008));
    }
    model.skin_weights.row(v) = (a / a.sum()).transpose();
  }
  model.skin_weights = model.skin_weights.cast<float>().cast<double>();

  Eigen::VectorXd everywhere = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd mouth(n);
  const Eigen::Vector3d mouth_center = FrontSurfacePoint(0.0, -0.045);
  for (int v = 0; v < n; ++v) {
    const double d2 = (tv.row(v).transpose() - mouth_center).squaredNorm();
    mouth[v] = std::exp(-d2 / (2.0 * 0.025 * 0.025));
  }
  model.shape_basis = SmoothBasis(tv, spec.n_shape, rng, everywhere);
  model.shape_sd.resize(spec.n_shape);
  for (int s = 0; s < spec.n_shape; ++s) {
    // About 1 cm RMS per vertex for one standard deviation of component 0.
    model.shape_sd[s] =
        static_cast<float>(0.01 * std::sqrt(static_cast<double>(n)) / (s + 1));
  }
  model.expr_basis = SmoothBasis(tv, spec.n_expr, rng, mouth);
  model.Validate();
  return model;
}

std::pair<int, int> ProceduralLipVertices(const HeadModel& model) {
  const Vertices& tv = model.template_vertices;
  int upper = NearestVertex(tv, FrontSurfacePoint(0.0, -0.035));
  int lower = NearestVertex(tv, FrontSurfacePoint(0.0, -0.055));
  Require(upper != lower, ErrorCode::kParameter,
          "model too coarse to separate the lips");
  return {upper, lower};
}

}  // namespace voca
