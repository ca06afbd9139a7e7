#include "grasp/align.hpp"

#include <cmath>

#include "grasp/errors.hpp"
#include "grasp/hull.hpp"
#include "grasp/sdf.hpp"

namespace grasp {
namespace {

void validate_box(const PixelBox& b, int width, int height, const char* which) {
  const bool finite = std::isfinite(b.u_min) && std::isfinite(b.v_min) && std::isfinite(b.u_max) &&
                      std::isfinite(b.v_max);
  if (!finite || !(b.u_max > b.u_min) || !(b.v_max > b.v_min)) {
    fail(ErrorCode::kInvalidBox, std::string(which) + " box has zero area");
  }
  if (width > 0 && height > 0 && (b.u_min < 0.0 || b.v_min < 0.0 || b.u_max > width || b.v_max > height)) {
    fail(ErrorCode::kInvalidBox, std::string(which) + " box lies outside the image");
  }
}

}  // namespace

void DetectionBoxes::validate(int width, int height) const {
  validate_box(hand, width, height, "hand");
  validate_box(object, width, height, "object");
}

double initial_scale_align(const TriMesh& hand, const TriMesh& object, const DetectionBoxes& boxes) {
  if (hand.empty() || object.empty()) fail(ErrorCode::kInvalidMesh, "scale alignment needs two nonempty meshes");
  boxes.validate(0, 0);
  const double k2d = std::sqrt(boxes.hand.area() / boxes.object.area());
  const double k3d = std::cbrt(convex_hull_volume(hand.vertices()) / convex_hull_volume(object.vertices()));
  return k3d / k2d;
}

ObjectPose init_object_pose(const TriMesh& hand, const TriMesh& object, const DetectionBoxes& boxes, int image_width,
                            int image_height) {
  boxes.validate(image_width, image_height);
  const double k = initial_scale_align(hand, object, boxes);
  ObjectPose pose;
  pose.scale = k;
  pose.rigid = RigidTransform(Mat3::Identity(), hand.centroid() - k * object.centroid());
  return pose;
}

void OpaConfig::validate() const {
  if (iterations < 0) fail(ErrorCode::kInvalidParams, "OPA iterations must be >= 0");
  if (!(learning_rate > 0.0) || samples == 0 || !(lambda_cam > 0.0) || !(lambda_dep >= 0.0) ||
      !(fd_step > 0.0) || mask_budget == 0 || !(tolerance >= 0.0)) {
    fail(ErrorCode::kInvalidParams, "OPA settings must be positive");
  }
}

OpaObjective::OpaObjective(std::vector<Vec3> object_points, Vec3 object_center, std::vector<Vec2> mask_points,
                           CameraIntrinsics k, std::optional<double> target_depth, double lambda_cam,
                           double lambda_dep)
    : points_(std::move(object_points)),
      center_(std::move(object_center)),
      mask_points_(std::move(mask_points)),
      mask_index_(mask_points_),
      k_(k),
      target_depth_(target_depth),
      lambda_cam_(lambda_cam),
      lambda_dep_(lambda_dep) {}

OpaTraceRow OpaObjective::evaluate(const ObjectPose& pose) const {
  const std::vector<Vec2> visible = project_points(points_, pose, k_).visible_points();
  OpaTraceRow row;
  row.chamfer = chamfer_2d(visible, mask_points_, mask_index_).normalized();
  if (target_depth_) {
    const double gap = pose.apply(center_).z() - *target_depth_;
    row.depth = gap * gap;
  }
  row.total = lambda_cam_ * row.chamfer + lambda_dep_ * row.depth;
  return row;
}

OpaResult optimize_object_pose(const TriMesh& object, const MaskImage& mask, const CameraIntrinsics& k,
                               const ObjectPose& init, const OpaConfig& cfg, std::optional<double> target_depth) {
  cfg.validate();
  k.validate();
  const OpaObjective objective(positions(farthest_point_sample(object, cfg.samples, cfg.seed)), object.centroid(),
                               mask_foreground_points(mask, cfg.mask_budget, cfg.seed, cfg.boundary_only), k,
                               target_depth, cfg.lambda_cam, cfg.lambda_dep);

  auto evaluate = [&](const ObjectPose& pose) {
    OpaTraceRow row;
    try {
      row = objective.evaluate(pose);
    } catch (const GraspError& e) {
      if (e.code() != ErrorCode::kNoVisiblePoints) throw;
      fail(ErrorCode::kDivergedOptimization, "object left the camera frame during pose optimization");
    }
    if (!std::isfinite(row.total)) fail(ErrorCode::kDivergedOptimization, "pose loss is not finite");
    return row;
  };

  OpaResult result;
  ObjectPose pose = init;
  pose.rigid.fold();
  try {
    result.trace.push_back(objective.evaluate(pose));
  } catch (const GraspError& e) {
    if (e.code() != ErrorCode::kNoVisiblePoints) throw;
    fail(ErrorCode::kObjectOutsideFrustum, "initial object pose projects outside the image");
  }
  if (!std::isfinite(result.trace[0].total)) fail(ErrorCode::kDivergedOptimization, "initial pose loss is not finite");
  result.pose = pose;
  result.best_loss = result.trace[0].total;

  Eigen::VectorXd lr = Eigen::VectorXd::Constant(6, cfg.learning_rate);
  if (cfg.translation_only) lr.head<3>().setZero();
  Adam adam(lr, cfg.moments);
  const double h = cfg.fd_step;

  for (int it = 1; it <= cfg.iterations; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(6);
    for (int i = cfg.translation_only ? 3 : 0; i < 6; ++i) {
      ObjectPose plus = pose, minus = pose;
      if (i < 3) {
        plus.rigid.set_increment(h * Vec3::Unit(i));
        minus.rigid.set_increment(-h * Vec3::Unit(i));
      } else {
        plus.rigid.set_translation(pose.rigid.translation() + h * Vec3::Unit(i - 3));
        minus.rigid.set_translation(pose.rigid.translation() - h * Vec3::Unit(i - 3));
      }
      grad[i] = (evaluate(plus).total - evaluate(minus).total) / (2.0 * h);
    }
    if (grad.cwiseAbs().maxCoeff() < cfg.tolerance) break;
    const Eigen::VectorXd delta = adam.step(grad);
    pose.rigid.set_increment(delta.head<3>());
    pose.rigid.fold();
    pose.rigid.set_translation(pose.rigid.translation() + delta.tail<3>());

    OpaTraceRow row = evaluate(pose);
    row.iteration = it;
    result.trace.push_back(row);
    if (row.total < result.best_loss) {
      result.best_loss = row.total;
      result.best_iteration = it;
      result.pose = pose;
    }
  }
  return result;
}

std::vector<double> candidate_distances(double center_norm, int count, double lo, double hi) {
  if (!(center_norm > 0.0) || count < 1 || !(lo > 0.0) || !(hi >= lo)) {
    fail(ErrorCode::kInvalidParams, "invalid candidate distance range");
  }
  std::vector<double> d(count);
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
    d[i] = center_norm * lo * std::pow(hi / lo, t);
  }
  return d;
}

CandidateSet generate_candidates(const TriMesh& object_camera_frame, std::span<const double> distances) {
  if (object_camera_frame.empty()) fail(ErrorCode::kInvalidMesh, "candidate generation needs a mesh");
  CandidateSet set;
  set.source = object_camera_frame;
  set.center = object_camera_frame.centroid();
  const double norm = set.center.norm();
  if (norm < 1e-6) fail(ErrorCode::kObjectAtCameraOrigin, "object center coincides with the camera origin");
  double previous = 0.0;
  for (double d : distances) {
    if (!(d > 0.0)) fail(ErrorCode::kInvalidParams, "candidate distances must be positive");
    if (!set.items.empty() && !(d > previous)) fail(ErrorCode::kInvalidParams, "candidate distances must increase");
    previous = d;
    Candidate c;
    c.distance = d;
    c.factor = d / norm;
    c.mesh = object_camera_frame.transformed(c.factor * Mat3::Identity(), Vec3::Zero());
    set.items.push_back(std::move(c));
  }
  return set;
}

size_t select_candidate(CandidateSet& candidates, std::span<const PointSample> contacts) {
  if (candidates.items.empty()) fail(ErrorCode::kInvalidParams, "no candidates to select from");
  if (contacts.empty()) fail(ErrorCode::kEmptyContactSet, "candidate selection needs contact points");
  // dist(p, f M) = f dist(p / f, M), so one index serves every candidate.
  const AccelIndex index = build_bvh(candidates.source);
  size_t best = 0;
  for (size_t i = 0; i < candidates.items.size(); ++i) {
    Candidate& c = candidates.items[i];
    double sum = 0.0;
    for (const PointSample& s : contacts) sum += c.factor * unsigned_distance(index, s.position / c.factor).value;
    c.score = sum / static_cast<double>(contacts.size());
    if (i > 0 && c.score < candidates.items[best].score - 1e-12) best = i;
  }
  return best;
}

}  // namespace grasp
