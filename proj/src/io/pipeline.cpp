#include "grasp/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "grasp/errors.hpp"

namespace grasp {
namespace {

using Json = nlohmann::ordered_json;

std::optional<Stage> find_stage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

Json moments_json(const AdamMoments& m) {
  return {{"beta1", m.beta1}, {"beta2", m.beta2}, {"epsilon", m.epsilon}};
}

Json opa_json(const OpaConfig& c) {
  return {{"iterations", c.iterations},
          {"learning_rate", c.learning_rate},
          {"samples", c.samples},
          {"lambda_cam", c.lambda_cam},
          {"lambda_dep", c.lambda_dep},
          {"moments", moments_json(c.moments)},
          {"tolerance", c.tolerance},
          {"fd_step", c.fd_step},
          {"mask_budget", c.mask_budget},
          {"translation_only", c.translation_only},
          {"boundary_only", c.boundary_only},
          {"seed", c.seed}};
}

Json candidates_json(const CandidateConfig& c) { return {{"count", c.count}, {"lo", c.lo}, {"hi", c.hi}}; }

Json contact_json(const ContactConfig& c) {
  return {{"lambda_pen", c.lambda_pen},
          {"lambda_spen", c.lambda_spen},
          {"lambda_sup", c.lambda_sup},
          {"delta", c.delta},
          {"iterations", c.iterations},
          {"lr_translate", c.lr_translate},
          {"lr_rotation", c.lr_rotation},
          {"lr_axis", c.lr_axis},
          {"moments", moments_json(c.moments)},
          {"use_dis", c.use_dis},
          {"use_pen", c.use_pen},
          {"use_spen", c.use_spen},
          {"use_sup", c.use_sup},
          {"penetration_on_hand_samples", c.penetration_on_hand_samples},
          {"hand_samples", c.hand_samples},
          {"seed", c.seed}};
}

Json simulation_json(const SimulationConfig& c) {
  return {{"gravity", Json::array({c.gravity.x(), c.gravity.y(), c.gravity.z()})},
          {"duration", c.duration},
          {"dt", c.dt},
          {"stiffness", c.stiffness},
          {"damping", c.damping},
          {"samples", c.samples},
          {"density", c.density},
          {"voxel_size", c.voxel_size},
          {"escape_cm", c.escape_cm},
          {"seed", c.seed}};
}

Json eval_json(const EvalConfig& c) {
  return {{"samples", c.samples},
          {"tau", c.tau},
          {"siv_voxel", c.siv_voxel},
          {"simulation", simulation_json(c.simulation)},
          {"seed", c.seed}};
}

bool same_kind(const nlohmann::json& def, const nlohmann::json& v) {
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_number_integer()) return v.is_number_integer() && (!def.is_number_unsigned() || v.get<long long>() >= 0);
  if (def.is_number()) return v.is_number();
  if (def.is_array()) {
    if (!v.is_array() || v.size() != def.size()) return false;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!same_kind(def[i], v[i])) return false;
    }
    return true;
  }
  return def.type() == v.type();
}

// Unknown keys and type mismatches against the defaults.
void check_against(const nlohmann::json& j, const nlohmann::json& defaults, const std::string& path) {
  if (!j.is_object()) fail(ErrorCode::kInvalidParams, "config '" + path + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    const std::string p = path.empty() ? key : path + "." + key;
    if (!defaults.contains(key)) fail(ErrorCode::kInvalidParams, "unknown config key '" + p + "'");
    const auto& def = defaults.at(key);
    if (def.is_object()) {
      check_against(value, def, p);
    } else if (!same_kind(def, value)) {
      fail(ErrorCode::kInvalidParams, "config key '" + p + "' has the wrong type");
    }
  }
}

nlohmann::json group(const nlohmann::json& j, const char* key) {
  return j.contains(key) ? j.at(key) : nlohmann::json::object();
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_moments(const nlohmann::json& j, AdamMoments& m) {
  const auto g = group(j, "moments");
  read(g, "beta1", m.beta1);
  read(g, "beta2", m.beta2);
  read(g, "epsilon", m.epsilon);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void record(GraspScene& scene, Stage stage, const Json& config, const Json& result) {
  Json c = config;
  c["defaults"] = kDefaultsVersion;
  scene.provenance.push_back({std::string(stage_name(stage)), c.dump(), result.dump()});
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kAlign:
      return "align";
    case Stage::kOpa:
      return "opa";
    case Stage::kSelect:
      return "select";
    case Stage::kRefine:
      return "refine";
  }
  return "";
}

Stage parse_stage(std::string_view name) {
  if (const auto s = find_stage(name)) return *s;
  fail(ErrorCode::kInvalidParams, "unknown stage '" + std::string(name) + "'");
}

nlohmann::ordered_json PipelineConfig::to_json() const {
  return {{"opa", opa_json(opa)},
          {"candidates", candidates_json(candidates)},
          {"contact", contact_json(contact)},
          {"eval", eval_json(eval)}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  check_against(j, nlohmann::json::parse(c.to_json().dump()), "");

  const auto o = group(j, "opa");
  read(o, "iterations", c.opa.iterations);
  read(o, "learning_rate", c.opa.learning_rate);
  read(o, "samples", c.opa.samples);
  read(o, "lambda_cam", c.opa.lambda_cam);
  read(o, "lambda_dep", c.opa.lambda_dep);
  read_moments(o, c.opa.moments);
  read(o, "tolerance", c.opa.tolerance);
  read(o, "fd_step", c.opa.fd_step);
  read(o, "mask_budget", c.opa.mask_budget);
  read(o, "translation_only", c.opa.translation_only);
  read(o, "boundary_only", c.opa.boundary_only);
  read(o, "seed", c.opa.seed);

  const auto g = group(j, "candidates");
  read(g, "count", c.candidates.count);
  read(g, "lo", c.candidates.lo);
  read(g, "hi", c.candidates.hi);

  const auto k = group(j, "contact");
  read(k, "lambda_pen", c.contact.lambda_pen);
  read(k, "lambda_spen", c.contact.lambda_spen);
  read(k, "lambda_sup", c.contact.lambda_sup);
  read(k, "delta", c.contact.delta);
  read(k, "iterations", c.contact.iterations);
  read(k, "lr_translate", c.contact.lr_translate);
  read(k, "lr_rotation", c.contact.lr_rotation);
  read(k, "lr_axis", c.contact.lr_axis);
  read_moments(k, c.contact.moments);
  read(k, "use_dis", c.contact.use_dis);
  read(k, "use_pen", c.contact.use_pen);
  read(k, "use_spen", c.contact.use_spen);
  read(k, "use_sup", c.contact.use_sup);
  read(k, "penetration_on_hand_samples", c.contact.penetration_on_hand_samples);
  read(k, "hand_samples", c.contact.hand_samples);
  read(k, "seed", c.contact.seed);

  const auto e = group(j, "eval");
  read(e, "samples", c.eval.samples);
  read(e, "tau", c.eval.tau);
  read(e, "siv_voxel", c.eval.siv_voxel);
  read(e, "seed", c.eval.seed);
  const auto s = group(e, "simulation");
  if (s.contains("gravity")) {
    const auto& gv = s.at("gravity");
    c.eval.simulation.gravity = Vec3(gv[0].get<double>(), gv[1].get<double>(), gv[2].get<double>());
  }
  read(s, "duration", c.eval.simulation.duration);
  read(s, "dt", c.eval.simulation.dt);
  read(s, "stiffness", c.eval.simulation.stiffness);
  read(s, "damping", c.eval.simulation.damping);
  read(s, "samples", c.eval.simulation.samples);
  read(s, "density", c.eval.simulation.density);
  read(s, "voxel_size", c.eval.simulation.voxel_size);
  read(s, "escape_cm", c.eval.simulation.escape_cm);
  read(s, "seed", c.eval.simulation.seed);
  return c;
}

void PipelineConfig::set(std::string_view assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    fail(ErrorCode::kInvalidParams, "override must look like key=value: '" + std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  nlohmann::json j = nlohmann::json::parse(to_json().dump());
  nlohmann::json* node = &j;
  size_t start = 0;
  for (;;) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) fail(ErrorCode::kInvalidParams, "unknown config key '" + key + "'");
    node = &node->at(part);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) fail(ErrorCode::kInvalidParams, "config key '" + key + "' names a group");
  *node = value;
  *this = from_json(j);
}

void PipelineConfig::validate() const {
  opa.validate();
  contact.validate();
  if (candidates.count < 1 || !(candidates.lo > 0.0) || !(candidates.hi > candidates.lo)) {
    fail(ErrorCode::kInvalidParams, "candidate grid needs count >= 1 and 0 < lo < hi");
  }
  if (eval.samples == 0 || !(eval.tau >= 0.0) || !(eval.siv_voxel > 0.0)) {
    fail(ErrorCode::kInvalidParams, "invalid evaluation settings");
  }
}

PipelineResult run_pipeline(const GraspScene& scene, std::span<const Stage> stages, const PipelineConfig& cfg) {
  cfg.validate();
  int done = -1;
  for (const ProvenanceEntry& e : scene.provenance) {
    if (const auto s = find_stage(e.stage)) done = std::max(done, static_cast<int>(*s));
  }
  int previous = -1;
  for (Stage s : stages) {
    const int order = static_cast<int>(s);
    if (order <= previous) {
      fail(ErrorCode::kStageOrderError, "stages must follow align, opa, select, refine without repeats");
    }
    if (order < done) {
      fail(ErrorCode::kStageOrderError, std::string(stage_name(s)) + " cannot run after " +
                                            std::string(stage_name(static_cast<Stage>(done))));
    }
    previous = order;
  }

  PipelineResult r;
  r.scene = scene;
  GraspScene& s = r.scene;
  for (Stage stage : stages) {
    switch (stage) {
      case Stage::kAlign: {
        const TriMesh hand = s.hand_mesh_camera();
        const TriMesh scaled = s.object.transformed(s.object_to_camera.scale * Mat3::Identity(), Vec3::Zero());
        const ObjectPose rel = init_object_pose(hand, scaled, s.boxes, s.camera.width, s.camera.height);
        s.object_to_camera.scale *= rel.scale;
        s.object_to_camera.rigid = rel.rigid;
        r.align_scale = rel.scale;
        record(s, stage, Json::object(), {{"k_scale", rel.scale}, {"scale", s.object_to_camera.scale}});
        break;
      }
      case Stage::kOpa: {
        const double depth = s.hand_mesh_camera().centroid().z();
        r.opa = optimize_object_pose(s.object, s.mask, s.camera, s.object_to_camera, cfg.opa, depth);
        s.object_to_camera = r.opa->pose;
        record(s, stage, opa_json(cfg.opa),
               {{"target_depth", depth},
                {"initial_loss", r.opa->trace.front().total},
                {"best_loss", r.opa->best_loss},
                {"best_iteration", r.opa->best_iteration}});
        break;
      }
      case Stage::kSelect: {
        const TriMesh placed = s.object_mesh_camera();
        const std::vector<double> distances =
            candidate_distances(placed.centroid().norm(), cfg.candidates.count, cfg.candidates.lo, cfg.candidates.hi);
        r.candidates = generate_candidates(placed, distances);
        r.selected = select_candidate(*r.candidates, s.contact_points_camera());
        const Candidate& chosen = r.candidates->items[r.selected];
        const RigidTransform& g = s.object_to_camera.rigid;
        s.object_to_camera.scale *= chosen.factor;
        s.object_to_camera.rigid =
            RigidTransform::from_parts(g.base_rotation(), g.increment(), chosen.factor * g.translation());
        Json cfg_json = candidates_json(cfg.candidates);
        cfg_json["contacts"] = s.contact_regions;
        record(s, stage, cfg_json,
               {{"index", r.selected},
                {"distance", chosen.distance},
                {"factor", chosen.factor},
                {"score", chosen.score}});
        break;
      }
      case Stage::kRefine: {
        const RigidTransform to_hand = s.hand_to_camera.inverse();
        ContactProblem problem;
        problem.rig = s.rig.get();
        problem.init = s.hand;
        problem.reference = s.hand.joint_pose;
        problem.contacts = s.contacts();
        problem.object = s.object_mesh_camera().transformed(to_hand.rotation(), to_hand.translation());
        r.refine = refine_grasp(problem, cfg.contact);
        s.hand = r.refine->params;
        Json cfg_json = contact_json(cfg.contact);
        cfg_json["contacts"] = s.contact_regions;
        record(s, stage, cfg_json,
               {{"initial_energy", r.refine->trace.front().total},
                {"best_energy", r.refine->trace[static_cast<size_t>(r.refine->best_iteration)].total},
                {"best_iteration", r.refine->best_iteration}});
        break;
      }
    }
  }
  return r;
}

MetricReport evaluate_scene(const GraspScene& scene, const EvalConfig& cfg) {
  const TriMesh hand = scene.hand_mesh_camera();
  const TriMesh object = scene.object_mesh_camera();
  MetricReport m;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.f5 = m.f10 = m.cd = nan;
  if (scene.ground_truth) {
    const TriMesh gt = scene.ground_truth->apply(scene.object);
    m.f5 = fscore(object, gt, 5.0, cfg.samples, cfg.seed);
    m.f10 = fscore(object, gt, 10.0, cfg.samples, cfg.seed);
    m.cd = chamfer_3d(object, gt, cfg.samples, cfg.seed);
  }
  m.siv = solid_intersection_volume(hand, object, cfg.siv_voxel);
  m.siv_table = m.siv / 100.0;
  m.cr = contact_ratio(positions(scene.contact_points_camera()), MeshSdf(object), cfg.tau);
  m.sd = simulation_displacement(hand, object, cfg.simulation);
  m.ipi = ipi(m.cr, m.siv_table);
  return m;
}

std::string opa_trace_csv(const OpaResult& result) {
  std::string out = "iteration,chamfer,depth,total\n";
  for (const OpaTraceRow& row : result.trace) {
    out += std::to_string(row.iteration) + "," + fmt(row.chamfer) + "," + fmt(row.depth) + "," + fmt(row.total) + "\n";
  }
  return out;
}

std::string contact_trace_csv(const RefineResult& result) {
  std::string out = "iteration,l_dis,l_pen,l_spen,l_sup,total\n";
  for (const EnergyBreakdown& e : result.trace) {
    out += std::to_string(e.iteration) + "," + fmt(e.l_dis) + "," + fmt(e.l_pen) + "," + fmt(e.l_spen) + "," +
           fmt(e.l_sup) + "," + fmt(e.total) + "\n";
  }
  return out;
}

std::string candidates_csv(const CandidateSet& candidates, size_t selected) {
  std::string out = "index,distance,factor,score,selected\n";
  for (size_t i = 0; i < candidates.items.size(); ++i) {
    const Candidate& c = candidates.items[i];
    out += std::to_string(i) + "," + fmt(c.distance) + "," + fmt(c.factor) + "," + fmt(c.score) + "," +
           (i == selected ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace grasp
