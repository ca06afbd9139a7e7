#ifndef GRASP_ALIGN_HPP
#define GRASP_ALIGN_HPP

#include <optional>
#include <span>
#include <vector>

#include "grasp/adam.hpp"
#include "grasp/camera.hpp"
#include "grasp/mesh.hpp"
#include "grasp/rigid.hpp"
#include "grasp/sampling.hpp"

namespace grasp {

struct PixelBox {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;

  double area() const { return (u_max - u_min) * (v_max - v_min); }
};

struct DetectionBoxes {
  PixelBox hand;
  PixelBox object;

  // Throws InvalidBox for empty boxes or boxes outside a width x height image.
  void validate(int width, int height) const;
};

// k_3D / k_2D from box areas and convex-hull volumes.
double initial_scale_align(const TriMesh& hand, const TriMesh& object, const DetectionBoxes& boxes);

// Identity rotation, object scaled about its centroid by the alignment
// factor, centroid placed on the hand centroid.
ObjectPose init_object_pose(const TriMesh& hand, const TriMesh& object, const DetectionBoxes& boxes, int image_width,
                            int image_height);

struct OpaConfig {
  int iterations = 200;
  double learning_rate = 1e-3;
  size_t samples = 1000;
  double lambda_cam = 1000.0;
  double lambda_dep = 0.1;
  AdamMoments moments;
  double tolerance = 1e-12;  // stop when every gradient entry is below this
  double fd_step = 1e-4;
  size_t mask_budget = kDefaultMaskBudget;
  bool translation_only = false;
  bool boundary_only = false;
  uint64_t seed = 0;

  void validate() const;
};

struct OpaTraceRow {
  int iteration = 0;
  double chamfer = 0.0;  // normalized, before the lambda_cam weight
  double depth = 0.0;    // squared depth gap, before the lambda_dep weight
  double total = 0.0;
};

struct OpaResult {
  ObjectPose pose;
  std::vector<OpaTraceRow> trace;
  int best_iteration = 0;
  double best_loss = 0.0;
};

// Object-pose loss evaluator shared by the optimizer and tests.
class OpaObjective {
 public:
  OpaObjective(std::vector<Vec3> object_points, Vec3 object_center, std::vector<Vec2> mask_points,
               CameraIntrinsics k, std::optional<double> target_depth, double lambda_cam, double lambda_dep);

  // Throws NoVisiblePoints when nothing projects into the frame.
  OpaTraceRow evaluate(const ObjectPose& pose) const;

 private:
  std::vector<Vec3> points_;
  Vec3 center_;
  std::vector<Vec2> mask_points_;
  PointGrid2d mask_index_;
  CameraIntrinsics k_;
  std::optional<double> target_depth_;
  double lambda_cam_;
  double lambda_dep_;
};

// Adam over (axis-angle increment, translation) with central-difference
// gradients; the scale stays fixed. Returns the best iterate. target_depth
// is the camera-frame depth of the hand center (depth prior off when empty).
OpaResult optimize_object_pose(const TriMesh& object, const MaskImage& mask, const CameraIntrinsics& k,
                               const ObjectPose& init, const OpaConfig& cfg,
                               std::optional<double> target_depth = std::nullopt);

struct Candidate {
  double distance = 0.0;
  double factor = 1.0;  // uniform scale about the camera origin
  TriMesh mesh;         // camera frame
  double score = 0.0;
};

struct CandidateSet {
  std::vector<Candidate> items;
  TriMesh source;              // the aligned object every candidate scales
  Vec3 center = Vec3::Zero();  // its center x_c
};

// count distances log-spaced over [lo, hi] * center_norm.
std::vector<double> candidate_distances(double center_norm, int count = 32, double lo = 0.25, double hi = 4.0);

// Candidate i is every vertex scaled by d_i / |x_c| about the camera origin.
CandidateSet generate_candidates(const TriMesh& object_camera_frame, std::span<const double> distances);

// Fills scores (mean unsigned distance from contacts to each candidate) and
// returns the index of the best; ties within 1e-12 go to the smaller distance.
size_t select_candidate(CandidateSet& candidates, std::span<const PointSample> contacts);

}  // namespace grasp

#endif  // GRASP_ALIGN_HPP
