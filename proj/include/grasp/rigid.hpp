#ifndef GRASP_RIGID_HPP
#define GRASP_RIGID_HPP

#include "grasp/mesh.hpp"

namespace grasp {

Mat3 skew(const Vec3& v);

// Rodrigues map from an axis-angle vector to a rotation matrix.
Mat3 axis_angle_to_matrix(const Vec3& w);
Vec3 matrix_to_axis_angle(const Mat3& r);

// Left Jacobian of SO(3): d(exp(w)) = [J_l(w) dw]_x exp(w).
Mat3 so3_left_jacobian(const Vec3& w);

// Nearest rotation (determinant +1) to an almost-orthonormal matrix.
Mat3 orthonormalize(const Mat3& r);

// Angle of r_a^T r_b in radians.
double geodesic_angle(const Mat3& r_a, const Mat3& r_b);

// Rotation plus translation. The rotation is stored as an orthonormal base
// matrix with an axis-angle increment composed on the left, so first-order
// optimizers can update an unconstrained 3-vector; fold() absorbs the
// increment into the base and re-orthonormalizes.
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform from_axis_angle(const Vec3& w, const Vec3& t) {
    return RigidTransform(axis_angle_to_matrix(w), t);
  }
  // Restores stored state bit for bit. Throws InvalidParams unless the base
  // is orthonormal with determinant 1 to within 1e-9.
  static RigidTransform from_parts(const Mat3& base, const Vec3& increment, const Vec3& translation);

  Mat3 rotation() const;
  const Mat3& base_rotation() const { return base_; }
  const Vec3& increment() const { return increment_; }
  const Vec3& translation() const { return translation_; }

  void set_increment(const Vec3& w) { increment_ = w; }
  void set_translation(const Vec3& t) { translation_ = t; }
  void fold();

  Vec3 apply(const Vec3& x) const { return rotation() * x + translation_; }
  RigidTransform inverse() const;
  RigidTransform operator*(const RigidTransform& rhs) const;

 private:
  Mat3 base_ = Mat3::Identity();
  Vec3 increment_ = Vec3::Zero();
  Vec3 translation_ = Vec3::Zero();
};

// Object placement: x_camera = R (s x_object) + t.
struct ObjectPose {
  double scale = 1.0;
  RigidTransform rigid;

  Vec3 apply(const Vec3& x) const { return rigid.rotation() * (scale * x) + rigid.translation(); }
  TriMesh apply(const TriMesh& mesh) const {
    return mesh.transformed(scale * rigid.rotation(), rigid.translation());
  }
};

}  // namespace grasp

#endif  // GRASP_RIGID_HPP
