#ifndef GRASP_HAND_HPP
#define GRASP_HAND_HPP

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "grasp/mesh.hpp"
#include "grasp/rigid.hpp"
#include "grasp/sampling.hpp"

namespace grasp {

inline constexpr int kNumJoints = 16;
inline constexpr int kNumPoseParams = 45;
inline constexpr int kNumShapeParams = 10;
// Global rotation (3), global translation (3), then 45 joint values.
inline constexpr int kNumHandDofs = 51;

using Vec6 = Eigen::Matrix<double, 6, 1>;
using PoseVector = Eigen::Matrix<double, kNumPoseParams, 1>;
using ShapeVector = Eigen::Matrix<double, kNumShapeParams, 1>;
using DofVector = Eigen::Matrix<double, kNumHandDofs, 1>;
using VertexJacobian = Eigen::Matrix<double, 3, kNumHandDofs>;

// MANO joint order: wrist, then index, middle, pinky, ring, thumb with three
// joints each (proximal to distal).
inline constexpr std::array<int, kNumJoints> kManoParents = {-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 0, 10, 11, 0, 13, 14};

struct HandParams {
  Vec6 global_pose = Vec6::Zero();  // axis-angle (3), translation in meters (3)
  PoseVector joint_pose = PoseVector::Zero();
  ShapeVector shape = ShapeVector::Zero();

  Vec3 global_rotation() const { return global_pose.head<3>(); }
  Vec3 translation() const { return global_pose.tail<3>(); }
  Vec3 joint(int j) const { return joint_pose.segment<3>(3 * (j - 1)); }  // j in [1, 15]

  DofVector dofs() const;
  void set_dofs(const DofVector& d);
  // Throws InvalidParams on non-finite entries.
  void validate() const;
};

class HandRig {
 public:
  HandRig() = default;
  // Throws InvalidParams when an invariant is violated.
  HandRig(TriMesh rest_mesh, std::array<int, kNumJoints> parents, std::vector<Vec3> joints, Eigen::MatrixXd weights,
          std::vector<Eigen::MatrixXd> vertex_shape_dirs, std::vector<Eigen::MatrixXd> joint_shape_dirs,
          std::map<std::string, std::vector<int>> contact_sites, bool right_hand = true);

  const TriMesh& rest_mesh() const { return rest_mesh_; }
  const std::array<int, kNumJoints>& parents() const { return parents_; }
  const std::vector<Vec3>& rest_joints() const { return joints_; }
  // Rest offset of joint j from its parent (absolute position for the root).
  Vec3 rest_offset(int j) const;
  const Eigen::MatrixXd& weights() const { return weights_; }
  const std::vector<Eigen::MatrixXd>& vertex_shape_dirs() const { return vertex_shape_dirs_; }
  const std::vector<Eigen::MatrixXd>& joint_shape_dirs() const { return joint_shape_dirs_; }
  const std::map<std::string, std::vector<int>>& contact_sites() const { return contact_sites_; }
  bool right_hand() const { return right_hand_; }
  size_t num_vertices() const { return rest_mesh_.num_vertices(); }

  // Nonzero skinning entries of vertex i.
  const std::vector<std::pair<int, double>>& weight_entries(int i) const { return sparse_weights_[i]; }
  bool in_subtree(int joint, int root) const { return subtree_[root][joint]; }
  // Joint with the largest skinning weight for vertex i.
  int dominant_joint(int i) const { return dominant_[i]; }

  std::vector<Vec3> shaped_vertices(const ShapeVector& beta) const;
  std::vector<Vec3> shaped_joints(const ShapeVector& beta) const;

 private:
  TriMesh rest_mesh_;
  std::array<int, kNumJoints> parents_{};
  std::vector<Vec3> joints_;
  Eigen::MatrixXd weights_;                        // V x 16
  std::vector<Eigen::MatrixXd> vertex_shape_dirs_;  // 10 of V x 3
  std::vector<Eigen::MatrixXd> joint_shape_dirs_;   // 10 of 16 x 3
  std::map<std::string, std::vector<int>> contact_sites_;
  bool right_hand_ = true;
  std::vector<std::vector<std::pair<int, double>>> sparse_weights_;
  std::array<std::array<bool, kNumJoints>, kNumJoints> subtree_{};
  std::vector<int> dominant_;
};

// Forward kinematics and skinning for one parameter vector. Shape is applied
// and held fixed; derivatives are taken with respect to the 51 pose dofs.
class HandKinematics {
 public:
  HandKinematics(const HandRig& rig, const HandParams& params);

  Vec3 vertex(int i) const;
  std::vector<Vec3> vertices() const;
  Vec3 point(int triangle, const Vec3& barycentric) const;
  VertexJacobian vertex_jacobian(int i) const;
  VertexJacobian point_jacobian(int triangle, const Vec3& barycentric) const;
  // Posed joint locations in the output frame.
  std::vector<Vec3> joints() const;

 private:
  // Skinned position before the global transform.
  Vec3 skinned(int i) const;

  const HandRig* rig_;
  HandParams params_;
  std::vector<Vec3> shaped_;
  std::vector<Vec3> shaped_joints_;
  std::array<Mat3, kNumJoints> rot_{};     // accumulated joint rotations
  std::array<Vec3, kNumJoints> origin_{};  // posed joint positions
  std::array<Mat3, kNumJoints> param_map_{};  // Rot(parent) J_l(theta_k)
  Mat3 global_rot_ = Mat3::Identity();
  Mat3 global_jl_ = Mat3::Identity();
};

struct ContactDesignation {
  std::vector<std::string> regions;
  std::vector<int> vertices;  // sorted union

  // Throws InvalidParams on unknown region names.
  static ContactDesignation from_regions(const HandRig& rig, const std::vector<std::string>& regions);
};

TriMesh pose_hand(const HandRig& rig, const HandParams& params);
// Throws EmptyContactSet when the designation has no vertices.
std::vector<PointSample> contact_points(const HandRig& rig, const HandParams& params,
                                        const ContactDesignation& designation);
// 3|ids| x 51, rows grouped per vertex.
Eigen::MatrixXd vertex_jacobian(const HandRig& rig, const HandParams& params, const std::vector<int>& ids);

// Params whose posed mesh equals g applied to the posed mesh of `params`.
HandParams compose(const RigidTransform& g, const HandParams& params, const HandRig& rig);

// Procedural right hand: box palm in the xz-plane with the palmar side
// facing +y, fingers extending along +x, thumb on the +z side.
HandRig builtin_capsule_hand();

inline const std::array<std::string, 5> kFingerNames = {"index", "middle", "pinky", "ring", "thumb"};

}  // namespace grasp

#endif  // GRASP_HAND_HPP
