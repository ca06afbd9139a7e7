#include "grasp/rigid.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "grasp/errors.hpp"

namespace grasp {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3 axis_angle_to_matrix(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const Mat3 k = skew(w);
  double a, b;
  if (theta2 < 1e-12) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 matrix_to_axis_angle(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Mat3 so3_left_jacobian(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const Mat3 k = skew(w);
  double a, b;
  if (theta2 < 1e-10) {
    a = 0.5 - theta2 / 24.0;
    b = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = (1.0 - std::cos(theta)) / theta2;
    b = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

double geodesic_angle(const Mat3& r_a, const Mat3& r_b) {
  const double c = 0.5 * ((r_a.transpose() * r_b).trace() - 1.0);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : base_(orthonormalize(rotation)), translation_(translation) {}

RigidTransform RigidTransform::from_parts(const Mat3& base, const Vec3& increment, const Vec3& translation) {
  if (!base.allFinite() || !increment.allFinite() || !translation.allFinite() ||
      (base * base.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(base.determinant() - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidParams, "rigid transform base must be a rotation");
  }
  RigidTransform g;
  g.base_ = base;
  g.increment_ = increment;
  g.translation_ = translation;
  return g;
}

Mat3 RigidTransform::rotation() const {
  if (increment_.isZero(0.0)) return base_;
  return axis_angle_to_matrix(increment_) * base_;
}

void RigidTransform::fold() {
  base_ = orthonormalize(rotation());
  increment_.setZero();
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation().transpose();
  return RigidTransform(rt, -rt * translation_);
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  const Mat3 r = rotation();
  return RigidTransform(r * rhs.rotation(), r * rhs.translation() + translation_);
}

}  // namespace grasp
