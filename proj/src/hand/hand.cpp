#include "grasp/hand.hpp"

#include <algorithm>
#include <cmath>

#include "grasp/errors.hpp"

namespace grasp {

DofVector HandParams::dofs() const {
  DofVector d;
  d << global_pose, joint_pose;
  return d;
}

void HandParams::set_dofs(const DofVector& d) {
  global_pose = d.head<6>();
  joint_pose = d.tail<kNumPoseParams>();
}

void HandParams::validate() const {
  if (!global_pose.allFinite() || !joint_pose.allFinite() || !shape.allFinite()) {
    fail(ErrorCode::kInvalidParams, "hand parameters must be finite");
  }
}

HandRig::HandRig(TriMesh rest_mesh, std::array<int, kNumJoints> parents, std::vector<Vec3> joints,
                 Eigen::MatrixXd weights, std::vector<Eigen::MatrixXd> vertex_shape_dirs,
                 std::vector<Eigen::MatrixXd> joint_shape_dirs, std::map<std::string, std::vector<int>> contact_sites,
                 bool right_hand)
    : rest_mesh_(std::move(rest_mesh)),
      parents_(parents),
      joints_(std::move(joints)),
      weights_(std::move(weights)),
      vertex_shape_dirs_(std::move(vertex_shape_dirs)),
      joint_shape_dirs_(std::move(joint_shape_dirs)),
      contact_sites_(std::move(contact_sites)),
      right_hand_(right_hand) {
  const auto nv = static_cast<Eigen::Index>(rest_mesh_.num_vertices());
  if (nv == 0) fail(ErrorCode::kInvalidParams, "hand rig has an empty rest mesh");
  if (parents_[0] != -1) fail(ErrorCode::kInvalidParams, "hand rig root must have no parent");
  for (int j = 1; j < kNumJoints; ++j) {
    if (parents_[j] < 0 || parents_[j] >= j) {
      fail(ErrorCode::kInvalidParams, "hand rig parents must form a tree listed parents-first");
    }
  }
  if (joints_.size() != kNumJoints) fail(ErrorCode::kInvalidParams, "hand rig needs 16 joints");
  if (weights_.rows() != nv || weights_.cols() != kNumJoints) {
    fail(ErrorCode::kInvalidParams, "skinning weights must be V x 16");
  }
  if (vertex_shape_dirs_.empty()) vertex_shape_dirs_.assign(kNumShapeParams, Eigen::MatrixXd::Zero(nv, 3));
  if (joint_shape_dirs_.empty()) joint_shape_dirs_.assign(kNumShapeParams, Eigen::MatrixXd::Zero(kNumJoints, 3));
  if (vertex_shape_dirs_.size() != kNumShapeParams || joint_shape_dirs_.size() != kNumShapeParams) {
    fail(ErrorCode::kInvalidParams, "hand rig needs 10 shape directions");
  }
  for (int k = 0; k < kNumShapeParams; ++k) {
    if (vertex_shape_dirs_[k].rows() != nv || vertex_shape_dirs_[k].cols() != 3 ||
        joint_shape_dirs_[k].rows() != kNumJoints || joint_shape_dirs_[k].cols() != 3) {
      fail(ErrorCode::kInvalidParams, "shape direction has the wrong size");
    }
  }
  sparse_weights_.resize(nv);
  dominant_.resize(nv);
  for (Eigen::Index i = 0; i < nv; ++i) {
    double sum = 0.0, best = -1.0;
    for (int j = 0; j < kNumJoints; ++j) {
      const double w = weights_(i, j);
      if (!(w >= 0.0)) fail(ErrorCode::kInvalidParams, "skinning weights must be nonnegative");
      sum += w;
      if (w > 0.0) sparse_weights_[i].emplace_back(j, w);
      if (w > best) {
        best = w;
        dominant_[i] = j;
      }
    }
    if (std::abs(sum - 1.0) > 1e-6) fail(ErrorCode::kInvalidParams, "skinning weight rows must sum to 1");
  }
  for (const auto& [name, ids] : contact_sites_) {
    for (int id : ids) {
      if (id < 0 || id >= nv) fail(ErrorCode::kInvalidParams, "contact site '" + name + "' has a bad vertex id");
    }
  }
  for (int j = 0; j < kNumJoints; ++j) {
    for (int a = j; a >= 0; a = parents_[a]) subtree_[a][j] = true;
  }
}

Vec3 HandRig::rest_offset(int j) const {
  return parents_[j] < 0 ? joints_[j] : Vec3(joints_[j] - joints_[parents_[j]]);
}

std::vector<Vec3> HandRig::shaped_vertices(const ShapeVector& beta) const {
  std::vector<Vec3> out = rest_mesh_.vertices();
  for (int k = 0; k < kNumShapeParams; ++k) {
    if (beta[k] == 0.0) continue;
    const Eigen::MatrixXd& d = vertex_shape_dirs_[k];
    for (size_t i = 0; i < out.size(); ++i) out[i] += beta[k] * d.row(static_cast<Eigen::Index>(i)).transpose();
  }
  return out;
}

std::vector<Vec3> HandRig::shaped_joints(const ShapeVector& beta) const {
  std::vector<Vec3> out = joints_;
  for (int k = 0; k < kNumShapeParams; ++k) {
    if (beta[k] == 0.0) continue;
    for (int j = 0; j < kNumJoints; ++j) out[j] += beta[k] * joint_shape_dirs_[k].row(j).transpose();
  }
  return out;
}

HandKinematics::HandKinematics(const HandRig& rig, const HandParams& params)
    : rig_(&rig),
      params_(params),
      shaped_(rig.shaped_vertices(params.shape)),
      shaped_joints_(rig.shaped_joints(params.shape)) {
  params.validate();
  const auto& parents = rig.parents();
  rot_[0] = Mat3::Identity();
  origin_[0] = shaped_joints_[0];
  param_map_[0] = Mat3::Zero();
  for (int j = 1; j < kNumJoints; ++j) {
    const int p = parents[j];
    const Vec3 theta = params.joint(j);
    rot_[j] = rot_[p] * axis_angle_to_matrix(theta);
    origin_[j] = rot_[p] * (shaped_joints_[j] - shaped_joints_[p]) + origin_[p];
    param_map_[j] = rot_[p] * so3_left_jacobian(theta);
  }
  global_rot_ = axis_angle_to_matrix(params.global_rotation());
  global_jl_ = so3_left_jacobian(params.global_rotation());
}

Vec3 HandKinematics::skinned(int i) const {
  const Vec3& y = shaped_[i];
  Vec3 out = Vec3::Zero();
  for (const auto& [j, w] : rig_->weight_entries(i)) out += w * (rot_[j] * (y - shaped_joints_[j]) + origin_[j]);
  return out;
}

Vec3 HandKinematics::vertex(int i) const {
  const Vec3& root = shaped_joints_[0];
  return global_rot_ * (skinned(i) - root) + root + params_.translation();
}

std::vector<Vec3> HandKinematics::vertices() const {
  std::vector<Vec3> out(shaped_.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = vertex(static_cast<int>(i));
  return out;
}

Vec3 HandKinematics::point(int triangle, const Vec3& barycentric) const {
  const Tri& t = rig_->rest_mesh().triangles()[triangle];
  return barycentric[0] * vertex(t[0]) + barycentric[1] * vertex(t[1]) + barycentric[2] * vertex(t[2]);
}

std::vector<Vec3> HandKinematics::joints() const {
  std::vector<Vec3> out(kNumJoints);
  const Vec3& root = shaped_joints_[0];
  for (int j = 0; j < kNumJoints; ++j) out[j] = global_rot_ * (origin_[j] - root) + root + params_.translation();
  return out;
}

VertexJacobian HandKinematics::vertex_jacobian(int i) const {
  VertexJacobian jac = VertexJacobian::Zero();
  const Vec3& y = shaped_[i];
  const auto& entries = rig_->weight_entries(i);
  std::array<Vec3, kNumJoints> transformed;
  for (const auto& [j, w] : entries) transformed[j] = rot_[j] * (y - shaped_joints_[j]) + origin_[j];

  Vec3 s = Vec3::Zero();
  for (const auto& [j, w] : entries) s += w * transformed[j];
  jac.block<3, 3>(0, 0) = -skew(global_rot_ * (s - shaped_joints_[0])) * global_jl_;
  jac.block<3, 3>(0, 3) = Mat3::Identity();

  for (int k = 1; k < kNumJoints; ++k) {
    Vec3 c = Vec3::Zero();
    bool touched = false;
    for (const auto& [j, w] : entries) {
      if (!rig_->in_subtree(j, k)) continue;
      c += w * (transformed[j] - origin_[k]);
      touched = true;
    }
    if (!touched) continue;
    jac.block<3, 3>(0, 6 + 3 * (k - 1)) = -global_rot_ * skew(c) * param_map_[k];
  }
  return jac;
}

VertexJacobian HandKinematics::point_jacobian(int triangle, const Vec3& barycentric) const {
  const Tri& t = rig_->rest_mesh().triangles()[triangle];
  return barycentric[0] * vertex_jacobian(t[0]) + barycentric[1] * vertex_jacobian(t[1]) +
         barycentric[2] * vertex_jacobian(t[2]);
}

ContactDesignation ContactDesignation::from_regions(const HandRig& rig, const std::vector<std::string>& regions) {
  ContactDesignation d;
  d.regions = regions;
  std::set<int> ids;
  for (const std::string& r : regions) {
    const auto it = rig.contact_sites().find(r);
    if (it == rig.contact_sites().end()) fail(ErrorCode::kInvalidParams, "unknown contact region '" + r + "'");
    ids.insert(it->second.begin(), it->second.end());
  }
  d.vertices.assign(ids.begin(), ids.end());
  return d;
}

TriMesh pose_hand(const HandRig& rig, const HandParams& params) {
  return rig.rest_mesh().with_vertices(HandKinematics(rig, params).vertices());
}

std::vector<PointSample> contact_points(const HandRig& rig, const HandParams& params,
                                        const ContactDesignation& designation) {
  if (designation.vertices.empty()) fail(ErrorCode::kEmptyContactSet, "contact designation is empty");
  const HandKinematics kin(rig, params);
  std::vector<PointSample> out;
  out.reserve(designation.vertices.size());
  for (int id : designation.vertices) {
    PointSample s;
    s.position = kin.vertex(id);
    s.source = SampleSource::kHandContact;
    s.vertex = id;
    out.push_back(s);
  }
  return out;
}

Eigen::MatrixXd vertex_jacobian(const HandRig& rig, const HandParams& params, const std::vector<int>& ids) {
  const HandKinematics kin(rig, params);
  Eigen::MatrixXd out(3 * ids.size(), kNumHandDofs);
  for (size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<size_t>(ids[r]) >= rig.num_vertices()) {
      fail(ErrorCode::kInvalidParams, "vertex id out of range");
    }
    out.block(3 * static_cast<Eigen::Index>(r), 0, 3, kNumHandDofs) = kin.vertex_jacobian(ids[r]);
  }
  return out;
}

HandParams compose(const RigidTransform& g, const HandParams& params, const HandRig& rig) {
  // v = R_g (y - j0) + j0 + t, so g v = (R R_g)(y - j0) + j0 + (R (j0 + t) + s - j0).
  const Vec3 j0 = rig.shaped_joints(params.shape)[0];
  const Mat3 r = g.rotation();
  HandParams out = params;
  out.global_pose.head<3>() = matrix_to_axis_angle(r * axis_angle_to_matrix(params.global_rotation()));
  out.global_pose.tail<3>() = r * (j0 + params.translation()) + g.translation() - j0;
  return out;
}

}  // namespace grasp
