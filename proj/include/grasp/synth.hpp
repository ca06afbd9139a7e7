#ifndef GRASP_SYNTH_HPP
#define GRASP_SYNTH_HPP

#include <cstdint>
#include <string>

#include "grasp/scene.hpp"

namespace grasp {

enum class PrimitiveKind { kSphere, kBox, kCylinder, kLatheMug };

std::string_view primitive_name(PrimitiveKind kind);
// Throws InvalidParams on unknown names.
PrimitiveKind parse_primitive(std::string_view name);

struct SyntheticSpec {
  PrimitiveKind kind = PrimitiveKind::kSphere;
  // sphere: radius; box: sizes; cylinder: radius, height; lathe-mug: outer
  // radius, height, wall. Unused entries are ignored.
  Vec3 dimensions = Vec3(0.04, 0.04, 0.04);
  Vec3 rotation = Vec3::Zero();              // ground truth, axis-angle
  Vec3 translation = Vec3(0.0, 0.0, 0.5);    // ground truth, meters
  double rotation_deg = 10.0;                // perturbation about a seeded axis
  double translation_m = 0.02;               // perturbation along a seeded direction
  double scale_factor = 1.0;                 // perturbation of the object scale
  CameraIntrinsics camera;
  uint64_t seed = 0;

  // Throws InvalidParams.
  void validate() const;
};

TriMesh make_primitive(PrimitiveKind kind, const Vec3& dimensions);

// Object mask rendered at the true pose, the builtin hand closed on the
// object's bounding sphere, boxes from the mask and the projected hand, and
// the perturbed pose as the current object placement. In-memory assets.
GraspScene synth_scene(const SyntheticSpec& spec);

}  // namespace grasp

#endif  // GRASP_SYNTH_HPP
