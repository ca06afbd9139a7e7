#include "grasp/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "grasp/errors.hpp"
#include "grasp/primitives.hpp"
#include "grasp/toy_grasp.hpp"

namespace grasp {
namespace {

constexpr int kSphereSubdivisions = 3;
constexpr int kSegments = 48;

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vec3 v(n(rng), n(rng), n(rng));
    if (v.norm() > 1e-9) return v.normalized();
  }
}

PixelBox bounding_box(std::span<const Vec2> pts, const CameraIntrinsics& k, double pad) {
  PixelBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2& p : pts) {
    b.u_min = std::min(b.u_min, p.x() - pad);
    b.v_min = std::min(b.v_min, p.y() - pad);
    b.u_max = std::max(b.u_max, p.x() + pad);
    b.v_max = std::max(b.v_max, p.y() + pad);
  }
  b.u_min = std::max(b.u_min, 0.0);
  b.v_min = std::max(b.v_min, 0.0);
  b.u_max = std::min(b.u_max, static_cast<double>(k.width));
  b.v_max = std::min(b.v_max, static_cast<double>(k.height));
  return b;
}

nlohmann::ordered_json spec_json(const SyntheticSpec& s) {
  auto vec = [](const Vec3& v) { return nlohmann::ordered_json::array({v.x(), v.y(), v.z()}); };
  return {{"kind", primitive_name(s.kind)},
          {"dimensions", vec(s.dimensions)},
          {"rotation", vec(s.rotation)},
          {"translation", vec(s.translation)},
          {"rotation_deg", s.rotation_deg},
          {"translation_m", s.translation_m},
          {"scale_factor", s.scale_factor},
          {"sphere_subdivisions", kSphereSubdivisions},
          {"segments", kSegments},
          {"seed", s.seed}};
}

}  // namespace

std::string_view primitive_name(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kSphere:
      return "sphere";
    case PrimitiveKind::kBox:
      return "box";
    case PrimitiveKind::kCylinder:
      return "cylinder";
    case PrimitiveKind::kLatheMug:
      return "lathe-mug";
  }
  return "";
}

PrimitiveKind parse_primitive(std::string_view name) {
  for (PrimitiveKind k : {PrimitiveKind::kSphere, PrimitiveKind::kBox, PrimitiveKind::kCylinder,
                          PrimitiveKind::kLatheMug}) {
    if (primitive_name(k) == name) return k;
  }
  fail(ErrorCode::kInvalidParams, "unknown primitive '" + std::string(name) + "'");
}

void SyntheticSpec::validate() const {
  const bool dims_ok = dimensions.allFinite() && dimensions.x() > 0.0 &&
                       (kind == PrimitiveKind::kSphere || dimensions.y() > 0.0) &&
                       (kind != PrimitiveKind::kBox || dimensions.z() > 0.0) &&
                       (kind != PrimitiveKind::kLatheMug || (dimensions.z() > 0.0 && dimensions.z() < dimensions.x()));
  if (!dims_ok) fail(ErrorCode::kInvalidParams, "primitive dimensions must be positive");
  if (!rotation.allFinite() || !translation.allFinite() || !std::isfinite(rotation_deg) ||
      !std::isfinite(translation_m) || !(scale_factor > 0.0) || !std::isfinite(scale_factor)) {
    fail(ErrorCode::kInvalidParams, "synthetic pose and perturbation must be finite");
  }
  camera.validate();
}

TriMesh make_primitive(PrimitiveKind kind, const Vec3& d) {
  switch (kind) {
    case PrimitiveKind::kSphere:
      return make_icosphere(d.x(), kSphereSubdivisions);
    case PrimitiveKind::kBox:
      return make_box(d, 4);
    case PrimitiveKind::kCylinder:
      return make_cylinder(d.x(), d.y(), kSegments, 4);
    case PrimitiveKind::kLatheMug:
      return make_lathe_mug(d.x(), d.y(), d.z(), kSegments);
  }
  fail(ErrorCode::kInvalidParams, "unknown primitive");
}

GraspScene synth_scene(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);

  GraspScene s;
  s.rig = builtin_rig();
  s.camera = spec.camera;
  s.object = make_primitive(spec.kind, spec.dimensions);

  ObjectPose truth;
  truth.rigid = RigidTransform::from_axis_angle(spec.rotation, spec.translation);
  s.ground_truth = truth;
  s.mask = rasterize_mask(s.object, truth, s.camera);
  if (s.mask.foreground_count() == 0) fail(ErrorCode::kEmptyMask, "synthetic object is not in view");

  const Vec3 axis = random_unit(rng);
  const Vec3 direction = random_unit(rng);
  s.object_to_camera.scale = truth.scale * spec.scale_factor;
  s.object_to_camera.rigid =
      RigidTransform::from_parts(truth.rigid.base_rotation(), axis * (spec.rotation_deg * std::numbers::pi / 180.0),
                                 truth.rigid.translation() + spec.translation_m * direction);

  // Hand closed on the bounding sphere of the object at its true pose.
  const TriMesh placed = truth.apply(s.object);
  const Vec3 center = placed.centroid();
  double radius = 0.0;
  for (const Vec3& v : placed.vertices()) radius = std::max(radius, (v - center).norm());
  const Vec3 grasp_center = sphere_grasp_center(radius);
  s.hand = sphere_grasp_pose(*s.rig, grasp_center, radius);
  s.hand_to_camera = RigidTransform(Mat3::Identity(), center - grasp_center);
  for (const std::string& f : kFingerNames) s.contact_regions.push_back(f + "_tip");

  const TriMesh hand = s.hand_mesh_camera();
  const ProjectedSet hand_px = project_points(hand.vertices(), RigidTransform(), s.camera);
  const std::vector<Vec2> visible = hand_px.visible_points();
  if (visible.empty()) fail(ErrorCode::kObjectOutsideFrustum, "synthetic hand is not in view");
  s.boxes.hand = bounding_box(visible, s.camera, 0.0);
  s.boxes.object = bounding_box(s.mask.foreground(), s.camera, 0.5);
  s.boxes.validate(s.camera.width, s.camera.height);

  s.provenance.push_back({"synth", spec_json(spec).dump(), nlohmann::ordered_json::object().dump()});
  return s;
}

}  // namespace grasp
