#ifndef GRASP_TOY_GRASP_HPP
#define GRASP_TOY_GRASP_HPP

#include <cstdint>

#include "grasp/contact.hpp"

namespace grasp {

struct ToyGraspSpec {
  double radius = 0.04;
  double float_distance = 0.02;  // initial gap along the palm normal
  double center_jitter = 0.004;  // per-axis uniform jitter of the sphere center
  uint64_t seed = 0;
};

struct ToyGrasp {
  ContactProblem problem;  // init floats away from the object
  HandParams truth;        // fingertips on the sphere
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

// Hand-frame center of a sphere of this radius resting below the palm.
Vec3 sphere_grasp_center(double radius);

// Builtin-hand pose closing on a sphere: per finger, a grid then pattern
// search over swing and flexion minimizing the mean signed distance of its
// tip site with no finger vertex inside. The thumb is first swung toward the
// center. Throws InvalidParams when a finger cannot reach the sphere.
HandParams sphere_grasp_pose(const HandRig& rig, const Vec3& center, double radius);

// Icosphere at sphere_grasp_center plus seeded jitter. The designation is the
// five tip sites, the reference pose is the truth, and the initial hand
// floats float_distance away along the palm normal.
ToyGrasp toy_sphere_grasp(const HandRig& rig, const ToyGraspSpec& spec);

}  // namespace grasp

#endif  // GRASP_TOY_GRASP_HPP
