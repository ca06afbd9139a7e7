#include "grasp/scene.hpp"

#include <json.hpp>

#include "grasp/errors.hpp"
#include "grasp/io.hpp"
#include "io_util.hpp"

namespace grasp {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kObjectFile = "object.ply";
constexpr const char* kMaskFile = "mask.png";

// Field access that reports the dotted path of whatever is missing or wrong.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const Json& json() const { return j_; }
  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Reader at(const char* key) const {
    const std::string p = child(key);
    if (!j_.is_object()) throw SceneParseError(path_.empty() ? std::string(key) : path_, "expected an object");
    const auto it = j_.find(key);
    if (it == j_.end()) throw SceneParseError(p, "missing");
    return Reader(*it, p);
  }

  double number(const char* key) const {
    const Reader r = at(key);
    if (!r.j_.is_number()) throw SceneParseError(r.path_, "expected a number");
    return r.j_.get<double>();
  }

  int integer(const char* key) const {
    const Reader r = at(key);
    if (!r.j_.is_number_integer()) throw SceneParseError(r.path_, "expected an integer");
    return r.j_.get<int>();
  }

  std::string string(const char* key) const {
    const Reader r = at(key);
    if (!r.j_.is_string()) throw SceneParseError(r.path_, "expected a string");
    return r.j_.get<std::string>();
  }

  std::vector<double> numbers(const char* key, size_t n) const {
    const Reader r = at(key);
    if (!r.j_.is_array() || r.j_.size() != n) {
      throw SceneParseError(r.path_, "expected " + std::to_string(n) + " numbers");
    }
    std::vector<double> out;
    for (const Json& v : r.j_) {
      if (!v.is_number()) throw SceneParseError(r.path_, "expected numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

 private:
  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json& j_;
  std::string path_;
};

template <typename V>
Json array_of(const V& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_json(const Mat3& m) {
  Json a = Json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  }
  return a;
}

Json rigid_json(const RigidTransform& g) {
  return Json{{"rotation", matrix_json(g.base_rotation())},
              {"increment", array_of(g.increment())},
              {"translation", array_of(g.translation())}};
}

Json object_pose_json(const ObjectPose& p) {
  Json j = rigid_json(p.rigid);
  j["scale"] = p.scale;
  return j;
}

Json box_json(const PixelBox& b) { return Json::array({b.u_min, b.v_min, b.u_max, b.v_max}); }

RigidTransform read_rigid(const Reader& r) {
  const auto rot = r.numbers("rotation", 9);
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = rot[i];
  Vec3 inc = Vec3::Zero();
  if (r.has("increment")) {
    const auto v = r.numbers("increment", 3);
    inc = Vec3(v[0], v[1], v[2]);
  }
  const auto t = r.numbers("translation", 3);
  try {
    return RigidTransform::from_parts(m, inc, Vec3(t[0], t[1], t[2]));
  } catch (const GraspError&) {
    throw SceneParseError(r.path() + ".rotation", "not a rotation");
  }
}

ObjectPose read_object_pose(const Reader& r) {
  ObjectPose p;
  p.rigid = read_rigid(r);
  p.scale = r.number("scale");
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) throw SceneParseError(r.path() + ".scale", "must be positive");
  return p;
}

PixelBox read_box(const Reader& r, const char* key) {
  const auto v = r.numbers(key, 4);
  return PixelBox{v[0], v[1], v[2], v[3]};
}

template <typename V>
V read_vector(const Reader& r, const char* key) {
  const auto v = r.numbers(key, static_cast<size_t>(V::RowsAtCompileTime));
  V out;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = v[static_cast<size_t>(i)];
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& ref) {
  const std::filesystem::path p(ref);
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

std::string relative_ref(const std::filesystem::path& asset, const std::filesystem::path& base_dir) {
  const auto abs_asset = std::filesystem::absolute(asset).lexically_normal();
  const auto abs_base = std::filesystem::absolute(base_dir.empty() ? "." : base_dir).lexically_normal();
  const auto rel = abs_asset.lexically_relative(abs_base);
  return (rel.empty() ? abs_asset : rel).generic_string();
}

template <typename F>
auto load_asset(const std::string& field, F&& load) {
  try {
    return load();
  } catch (const SceneParseError&) {
    throw;
  } catch (const GraspError& e) {
    if (e.code() == ErrorCode::kMissingAsset) throw;
    throw SceneParseError(field, e.what());
  }
}

}  // namespace

std::shared_ptr<const HandRig> builtin_rig() {
  static const std::shared_ptr<const HandRig> rig = std::make_shared<const HandRig>(builtin_capsule_hand());
  return rig;
}

TriMesh GraspScene::hand_mesh_camera() const {
  return pose_hand(*rig, hand).transformed(hand_to_camera.rotation(), hand_to_camera.translation());
}

TriMesh GraspScene::object_mesh_camera() const { return object_to_camera.apply(object); }

ContactDesignation GraspScene::contacts() const { return ContactDesignation::from_regions(*rig, contact_regions); }

std::vector<PointSample> GraspScene::contact_points_camera() const {
  std::vector<PointSample> pts = contact_points(*rig, hand, contacts());
  for (PointSample& s : pts) s.position = hand_to_camera.apply(s.position);
  return pts;
}

GraspScene parse_scene(const std::string& json_text, const std::filesystem::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SceneParseError("", e.what());
  }
  const Reader root(doc, "");
  if (!doc.is_object()) throw SceneParseError("", "expected an object");
  if (root.string("schema") != kSceneSchema) throw SceneParseError("schema", "unsupported schema");

  GraspScene s;
  const Reader cam = root.at("camera");
  s.camera = CameraIntrinsics{cam.number("fx"), cam.number("fy"), cam.number("cx"),
                              cam.number("cy"), cam.integer("width"), cam.integer("height")};
  try {
    s.camera.validate();
  } catch (const GraspError& e) {
    throw SceneParseError("camera", e.what());
  }

  const Reader hand = root.at("hand");
  const std::string rig_ref = hand.string("rig");
  if (rig_ref == kBuiltinRig) {
    s.rig = builtin_rig();
  } else {
    s.rig_path = resolve(base_dir, rig_ref);
    s.rig = std::make_shared<const HandRig>(load_asset("hand.rig", [&] { return load_rig(s.rig_path); }));
  }
  s.hand.global_pose = read_vector<Vec6>(hand, "global_pose");
  s.hand.joint_pose = read_vector<PoseVector>(hand, "joint_pose");
  s.hand.shape = read_vector<ShapeVector>(hand, "shape");
  if (!s.hand.global_pose.allFinite() || !s.hand.joint_pose.allFinite() || !s.hand.shape.allFinite()) {
    throw SceneParseError("hand", "parameters must be finite");
  }
  s.hand_to_camera = read_rigid(hand.at("to_camera"));

  const Reader object = root.at("object");
  s.unit_scale = object.has("unit_scale") ? object.number("unit_scale") : 1.0;
  if (!(s.unit_scale > 0.0)) throw SceneParseError("object.unit_scale", "must be positive");
  s.object_path = resolve(base_dir, object.string("mesh"));
  s.object = load_asset("object.mesh", [&] { return load_mesh(s.object_path, s.unit_scale); });
  if (s.object.empty()) throw SceneParseError("object.mesh", "mesh has no triangles");
  s.object_to_camera = read_object_pose(object.at("to_camera"));

  s.mask_path = resolve(base_dir, root.string("mask"));
  s.mask = load_asset("mask", [&] { return load_mask(s.mask_path); });
  if (s.mask.width() != s.camera.width || s.mask.height() != s.camera.height) {
    throw SceneParseError("mask", "size differs from the camera image");
  }

  const Reader boxes = root.at("boxes");
  s.boxes.hand = read_box(boxes, "hand");
  s.boxes.object = read_box(boxes, "object");
  try {
    s.boxes.validate(s.camera.width, s.camera.height);
  } catch (const GraspError& e) {
    throw SceneParseError("boxes", e.what());
  }

  const Reader contacts = root.at("contacts");
  if (!contacts.json().is_array() || contacts.json().empty()) throw SceneParseError("contacts", "expected region names");
  for (const Json& c : contacts.json()) {
    if (!c.is_string()) throw SceneParseError("contacts", "expected region names");
    s.contact_regions.push_back(c.get<std::string>());
  }
  try {
    (void)s.contacts();
  } catch (const GraspError& e) {
    throw SceneParseError("contacts", e.what());
  }

  if (root.has("ground_truth")) s.ground_truth = read_object_pose(root.at("ground_truth").at("object_to_camera"));

  if (root.has("provenance")) {
    const Reader prov = root.at("provenance");
    if (!prov.json().is_array()) throw SceneParseError("provenance", "expected an array");
    for (size_t i = 0; i < prov.json().size(); ++i) {
      const Reader e(prov.json()[i], "provenance[" + std::to_string(i) + "]");
      const Reader cfg = e.at("config");
      const Reader res = e.at("result");
      if (!cfg.json().is_object() || !res.json().is_object()) throw SceneParseError(e.path(), "expected objects");
      s.provenance.push_back({e.string("stage"), cfg.json().dump(), res.json().dump()});
    }
  }
  return s;
}

GraspScene load_scene(const std::filesystem::path& path) {
  return parse_scene(read_file(path), path.parent_path());
}

std::string scene_to_json(const GraspScene& s, const std::filesystem::path& base_dir) {
  Json j;
  j["schema"] = kSceneSchema;
  j["camera"] = {{"fx", s.camera.fx}, {"fy", s.camera.fy},       {"cx", s.camera.cx},
                 {"cy", s.camera.cy}, {"width", s.camera.width}, {"height", s.camera.height}};
  j["hand"] = {{"rig", s.rig_path.empty() ? std::string(kBuiltinRig) : relative_ref(s.rig_path, base_dir)},
               {"global_pose", array_of(s.hand.global_pose)},
               {"joint_pose", array_of(s.hand.joint_pose)},
               {"shape", array_of(s.hand.shape)},
               {"to_camera", rigid_json(s.hand_to_camera)}};
  j["object"] = {{"mesh", s.object_path.empty() ? std::string(kObjectFile) : relative_ref(s.object_path, base_dir)},
                 {"unit_scale", s.object_path.empty() ? 1.0 : s.unit_scale},
                 {"to_camera", object_pose_json(s.object_to_camera)}};
  j["mask"] = s.mask_path.empty() ? std::string(kMaskFile) : relative_ref(s.mask_path, base_dir);
  j["boxes"] = {{"hand", box_json(s.boxes.hand)}, {"object", box_json(s.boxes.object)}};
  j["contacts"] = s.contact_regions;
  if (s.ground_truth) j["ground_truth"] = {{"object_to_camera", object_pose_json(*s.ground_truth)}};
  Json prov = Json::array();
  for (const ProvenanceEntry& e : s.provenance) {
    prov.push_back({{"stage", e.stage}, {"config", Json::parse(e.config)}, {"result", Json::parse(e.result)}});
  }
  j["provenance"] = prov;
  return j.dump(2) + "\n";
}

void save_scene(const GraspScene& scene, const std::filesystem::path& path) {
  const std::filesystem::path dir = path.parent_path();
  if (scene.object_path.empty()) save_mesh(scene.object, dir / kObjectFile);
  if (scene.mask_path.empty()) save_mask(scene.mask, dir / kMaskFile);
  write_file(path, scene_to_json(scene, dir));
}

}  // namespace grasp
