#ifndef GRASP_SCENE_HPP
#define GRASP_SCENE_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grasp/align.hpp"
#include "grasp/camera.hpp"
#include "grasp/hand.hpp"
#include "grasp/mesh.hpp"
#include "grasp/rigid.hpp"

namespace grasp {

inline constexpr const char* kSceneSchema = "grasp-scene/1";
inline constexpr const char* kBuiltinRig = "builtin";
// Recorded with every provenance entry; bump when a default changes.
inline constexpr const char* kDefaultsVersion = "grasp-defaults/1";

struct ProvenanceEntry {
  std::string stage;
  std::string config;  // compact JSON object
  std::string result;  // compact JSON object

  bool operator==(const ProvenanceEntry&) const = default;
};

// Hand and object in one camera frame. Asset paths are absolute; an empty
// path means the asset lives only in memory and is written beside the scene
// file on save.
struct GraspScene {
  std::filesystem::path rig_path;  // empty: the builtin hand
  std::shared_ptr<const HandRig> rig;
  HandParams hand;
  RigidTransform hand_to_camera;

  std::filesystem::path object_path;
  double unit_scale = 1.0;
  TriMesh object;  // object frame, unit_scale applied
  ObjectPose object_to_camera;

  CameraIntrinsics camera;
  std::filesystem::path mask_path;
  MaskImage mask;
  DetectionBoxes boxes;
  std::vector<std::string> contact_regions;

  std::optional<ObjectPose> ground_truth;  // object to camera
  std::vector<ProvenanceEntry> provenance;  // append-only

  TriMesh hand_mesh_camera() const;
  TriMesh object_mesh_camera() const;
  ContactDesignation contacts() const;
  // Contact vertices in the camera frame.
  std::vector<PointSample> contact_points_camera() const;
};

// Shared instance of the procedural hand.
std::shared_ptr<const HandRig> builtin_rig();

// Throws SceneParseError naming the offending field, MissingAsset for absent
// referenced files. Relative asset paths resolve against the scene's folder.
GraspScene load_scene(const std::filesystem::path& path);
GraspScene parse_scene(const std::string& json_text, const std::filesystem::path& base_dir);

// Writes the scene JSON with asset paths relative to the scene's folder.
// In-memory assets are written beside it as object.ply and mask.png.
void save_scene(const GraspScene& scene, const std::filesystem::path& path);
std::string scene_to_json(const GraspScene& scene, const std::filesystem::path& base_dir);

}  // namespace grasp

#endif  // GRASP_SCENE_HPP
