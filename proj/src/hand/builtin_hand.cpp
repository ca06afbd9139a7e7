#include <algorithm>
#include <cmath>
#include <numbers>

#include "grasp/hand.hpp"
#include "grasp/primitives.hpp"

namespace grasp {
namespace {

constexpr double kPalmLength = 0.09;
constexpr double kPalmHalfThickness = 0.012;
constexpr double kPalmHalfWidth = 0.042;
constexpr double kBlend = 0.004;  // half-width of the weight ramp at a joint
constexpr int kRingSegments = 16;
constexpr double kStation = 0.0025;  // axial ring spacing along a finger

struct Finger {
  std::string name;
  std::array<int, 3> joints;
  Vec3 base;     // proximal joint, center of the base cap
  Vec3 dir;      // unit axis toward the tip
  Vec3 palmar;   // unit, perpendicular to dir
  double radius;
  std::array<double, 3> lengths;

  double length() const { return lengths[0] + lengths[1] + lengths[2]; }
  double station(int k) const {  // axial position of the k-th joint
    return k == 0 ? 0.0 : k == 1 ? lengths[0] : lengths[0] + lengths[1];
  }
};

std::vector<Finger> finger_layout() {
  const Vec3 x = Vec3::UnitX(), y = Vec3::UnitY();
  const double bx = 0.0985;
  return {
      {"index", {1, 2, 3}, {bx, 0, 0.036}, x, y, 0.0065, {0.045, 0.027, 0.022}},
      {"middle", {4, 5, 6}, {bx, 0, 0.012}, x, y, 0.0065, {0.050, 0.031, 0.024}},
      {"pinky", {7, 8, 9}, {bx, 0, -0.036}, x, y, 0.0058, {0.036, 0.022, 0.020}},
      {"ring", {10, 11, 12}, {bx, 0, -0.012}, x, y, 0.0065, {0.046, 0.029, 0.023}},
      {"thumb", {13, 14, 15}, {0.025, 0, 0.056}, Vec3(0.6, 0, 0.8), y, 0.0075, {0.040, 0.032, 0.028}},
  };
}

TriMesh capsule(const Finger& f) {
  const double r = f.radius, len = f.length();
  std::vector<Vec2> profile;
  constexpr int kCap = 5;
  for (int i = 0; i < kCap; ++i) {
    const double a = -std::numbers::pi / 2 + (std::numbers::pi / 2) * i / kCap;
    profile.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  profile.front().x() = 0.0;
  const int stations = static_cast<int>(std::ceil(len / kStation));
  for (int i = 0; i <= stations; ++i) profile.emplace_back(r, len * i / stations);
  for (int i = 1; i <= kCap; ++i) {
    const double a = (std::numbers::pi / 2) * i / kCap;
    profile.emplace_back(r * std::cos(a), len + r * std::sin(a));
  }
  profile.back().x() = 0.0;
  const TriMesh local = make_lathe(profile, kRingSegments);
  Mat3 frame;
  frame.col(0) = f.palmar;
  frame.col(1) = f.dir.cross(f.palmar);
  frame.col(2) = f.dir;
  return local.transformed(frame, f.base);
}

double smooth_ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

HandRig builtin_capsule_hand() {
  const std::vector<Finger> fingers = finger_layout();
  std::vector<TriMesh> parts;
  parts.push_back(make_box(Vec3(kPalmLength, 2 * kPalmHalfThickness, 2 * kPalmHalfWidth), 10)
                      .translated(Vec3(kPalmLength / 2, 0, 0)));
  for (const Finger& f : fingers) parts.push_back(capsule(f));
  const TriMesh mesh = TriMesh::merged(parts);

  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  std::vector<int> owner(nv, -1);  // finger index, -1 for the palm
  {
    size_t offset = parts[0].num_vertices();
    for (size_t k = 0; k < fingers.size(); ++k) {
      std::fill(owner.begin() + offset, owner.begin() + offset + parts[k + 1].num_vertices(), static_cast<int>(k));
      offset += parts[k + 1].num_vertices();
    }
  }

  std::vector<Vec3> joints(kNumJoints, Vec3::Zero());
  for (const Finger& f : fingers) {
    for (int k = 0; k < 3; ++k) joints[f.joints[k]] = f.base + f.station(k) * f.dir;
  }

  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(nv, kNumJoints);
  std::vector<Eigen::MatrixXd> vdirs(kNumShapeParams, Eigen::MatrixXd::Zero(nv, 3));
  std::vector<Eigen::MatrixXd> jdirs(kNumShapeParams, Eigen::MatrixXd::Zero(kNumJoints, 3));
  std::map<std::string, std::vector<int>> sites;

  for (Eigen::Index i = 0; i < nv; ++i) {
    const Vec3 p = mesh.vertex(i);
    // Shape directions shared by every vertex: overall size and palm width.
    vdirs[0].row(i) = 0.1 * p.transpose();
    if (owner[i] < 0) {
      weights(i, 0) = 1.0;
      vdirs[2].row(i) = Vec3(0, 0, 0.1 * p.z()).transpose();
      vdirs[9].row(i) = Vec3(0, 0.1 * p.y(), 0).transpose();
      if (p.y() > kPalmHalfThickness - 1e-9 && p.x() > 0.015 && p.x() < 0.08 && std::abs(p.z()) < 0.03) {
        sites["palm"].push_back(static_cast<int>(i));
      }
      continue;
    }
    const Finger& f = fingers[owner[i]];
    const double s = (p - f.base).dot(f.dir);
    const Vec3 axis_point = f.base + std::clamp(s, 0.0, f.length()) * f.dir;
    const Vec3 radial = p - axis_point;
    const double l1 = f.station(1), l2 = f.station(2);
    const double share_b = smooth_ramp((s - (l1 - kBlend)) / (2 * kBlend));
    const double share_c = smooth_ramp((s - (l2 - kBlend)) / (2 * kBlend));
    weights(i, f.joints[0]) = 1.0 - share_b;
    weights(i, f.joints[1]) = share_b - share_c;
    weights(i, f.joints[2]) = share_c;

    const Vec3 lengthen = 0.1 * std::clamp(s, 0.0, f.length()) * f.dir;
    vdirs[1].row(i) = lengthen.transpose();
    vdirs[4 + owner[i]].row(i) = lengthen.transpose();
    vdirs[2].row(i) = Vec3(0, 0, 0.1 * f.base.z()).transpose();
    if (radial.norm() > 1e-12) vdirs[3].row(i) = (0.001 * radial.normalized()).transpose();

    const bool palmar = radial.dot(f.palmar) >= 0.8 * f.radius;
    if (palmar && s >= l2 + 0.35 * f.lengths[2] && s <= f.length()) {
      sites[f.name + "_tip"].push_back(static_cast<int>(i));
    }
    if (palmar && s >= l1 + 0.2 * f.lengths[1] && s <= l1 + 0.8 * f.lengths[1]) {
      sites[f.name + "_middle"].push_back(static_cast<int>(i));
    }
  }

  for (int j = 0; j < kNumJoints; ++j) jdirs[0].row(j) = 0.1 * joints[j].transpose();
  for (size_t k = 0; k < fingers.size(); ++k) {
    const Finger& f = fingers[k];
    for (int m = 0; m < 3; ++m) {
      const int j = f.joints[m];
      const Vec3 lengthen = 0.1 * f.station(m) * f.dir;
      jdirs[1].row(j) = lengthen.transpose();
      jdirs[4 + k].row(j) = lengthen.transpose();
      jdirs[2].row(j) = Vec3(0, 0, 0.1 * f.base.z()).transpose();
    }
  }

  return HandRig(mesh, kManoParents, std::move(joints), std::move(weights), std::move(vdirs), std::move(jdirs),
                 std::move(sites), true);
}

}  // namespace grasp
