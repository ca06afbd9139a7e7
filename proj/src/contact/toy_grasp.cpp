#include "grasp/toy_grasp.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "grasp/errors.hpp"
#include "grasp/primitives.hpp"

namespace grasp {
namespace {

constexpr int kSphereSubdivisions = 4;
constexpr double kCenterX = 0.11;
constexpr double kPalmGap = 0.02;

struct FingerChain {
  const char* name;
  int first_joint;
  Vec3 direction;  // rest pointing direction in the xz-plane
  Vec3 flex_axis;  // direction x palmar normal
  bool aim;        // swing toward the sphere center before the search
};

const std::array<FingerChain, 5> kChains = {{
    {"index", 1, Vec3(1, 0, 0), Vec3(0, 0, 1), false},
    {"middle", 4, Vec3(1, 0, 0), Vec3(0, 0, 1), false},
    {"pinky", 7, Vec3(1, 0, 0), Vec3(0, 0, 1), false},
    {"ring", 10, Vec3(1, 0, 0), Vec3(0, 0, 1), false},
    {"thumb", 13, Vec3(0.6, 0, 0.8), Vec3(-0.8, 0, 0.6), true},
}};

// Finger angles: swing about the palm normal, then flexion at each joint.
using ChainAngles = std::array<double, 4>;

void set_chain(HandParams& p, const FingerChain& c, const ChainAngles& a) {
  const Mat3 first = axis_angle_to_matrix(a[0] * Vec3::UnitY()) * axis_angle_to_matrix(a[1] * c.flex_axis);
  p.joint_pose.segment<3>(3 * (c.first_joint - 1)) = matrix_to_axis_angle(first);
  for (int k = 1; k < 3; ++k) p.joint_pose.segment<3>(3 * (c.first_joint + k - 1)) = a[1 + k] * c.flex_axis;
}

}  // namespace

Vec3 sphere_grasp_center(double radius) { return Vec3(kCenterX, 0.0125 + kPalmGap + radius, 0.0); }

HandParams sphere_grasp_pose(const HandRig& rig, const Vec3& center, double radius) {
  if (!(radius > 0.0) || !center.allFinite()) fail(ErrorCode::kInvalidParams, "invalid grasp sphere");
  // The search uses the exact sphere rather than its tessellation.
  auto sdf = [&](const Vec3& p) { return (p - center).norm() - radius; };

  // Grid search per finger: the tip site as close to the surface as possible
  // while no vertex of the finger enters the sphere.
  HandParams truth;
  for (const FingerChain& c : kChains) {
    const std::vector<int>& tip = rig.contact_sites().at(std::string(c.name) + "_tip");
    std::vector<int> chain;
    for (int v = 0; v < static_cast<int>(rig.num_vertices()); ++v) {
      const int j = rig.dominant_joint(v);
      if (j >= c.first_joint && j < c.first_joint + 3) chain.push_back(v);
    }
    const Vec3 toward = center - rig.rest_joints()[c.first_joint];
    const double base_swing =
        c.aim ? std::atan2(-toward.z(), toward.x()) - std::atan2(-c.direction.z(), c.direction.x()) : 0.0;

    // Mean signed tip distance, infinite when any finger vertex is inside.
    auto score = [&](const ChainAngles& a) {
      HandParams p = truth;
      set_chain(p, c, a);
      const HandKinematics kin(rig, p);
      double sum = 0.0;
      for (int v : tip) sum += sdf(kin.vertex(v));
      for (int v : chain) {
        if (sdf(kin.vertex(v)) < 0.0) return std::numeric_limits<double>::infinity();
      }
      return sum / static_cast<double>(tip.size());
    };

    double best = std::numeric_limits<double>::infinity();
    ChainAngles arg{};
    for (double swing = -0.3; swing <= 0.3 + 1e-9; swing += 0.1) {
      for (double proximal = -0.3; proximal <= 1.5 + 1e-9; proximal += 0.03) {
        for (double distal = -0.9; distal <= 1.2 + 1e-9; distal += 0.06) {
          const ChainAngles a = {base_swing + swing, proximal, distal, distal};
          const double s = score(a);
          if (s < best) {
            best = s;
            arg = a;
          }
        }
      }
    }
    // Pattern search with shrinking steps, each joint free.
    for (double step = 0.02; step > 5e-4; step *= 0.5) {
      for (bool moved = true; moved;) {
        moved = false;
        for (size_t k = 0; k < arg.size(); ++k) {
          for (double sign : {-1.0, 1.0}) {
            ChainAngles a = arg;
            a[k] += sign * step;
            const double s = score(a);
            if (s < best) {
              best = s;
              arg = a;
              moved = true;
            }
          }
        }
      }
    }
    if (!std::isfinite(best)) fail(ErrorCode::kInvalidParams, std::string(c.name) + " cannot reach the sphere");
    set_chain(truth, c, arg);
  }
  return truth;
}

ToyGrasp toy_sphere_grasp(const HandRig& rig, const ToyGraspSpec& spec) {
  if (!(spec.radius > 0.0) || !(spec.float_distance >= 0.0) || !(spec.center_jitter >= 0.0)) {
    fail(ErrorCode::kInvalidParams, "invalid toy grasp spec");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(-spec.center_jitter, spec.center_jitter);

  ToyGrasp out;
  out.radius = spec.radius;
  out.center = sphere_grasp_center(spec.radius);
  for (int a = 0; a < 3; ++a) out.center[a] += jitter(rng);
  out.problem.rig = &rig;
  out.problem.object = make_icosphere(spec.radius, kSphereSubdivisions).translated(out.center);
  out.truth = sphere_grasp_pose(rig, out.center, spec.radius);
  const HandParams& truth = out.truth;

  std::vector<std::string> regions;
  for (const FingerChain& c : kChains) regions.push_back(std::string(c.name) + "_tip");
  out.problem.contacts = ContactDesignation::from_regions(rig, regions);
  out.problem.reference = truth.joint_pose;
  out.problem.init = truth;
  out.problem.init.global_pose.tail<3>() -= spec.float_distance * Vec3::UnitY();
  return out;
}

}  // namespace grasp
