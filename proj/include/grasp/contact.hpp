#ifndef GRASP_CONTACT_HPP
#define GRASP_CONTACT_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "grasp/adam.hpp"
#include "grasp/hand.hpp"
#include "grasp/sdf.hpp"

namespace grasp {

struct ContactConfig {
  double lambda_pen = 1.0;
  double lambda_spen = 0.75;
  double lambda_sup = 0.3;
  double delta = 0.01;  // self-penetration threshold, meters
  int iterations = 2000;
  double lr_translate = 1e-4;
  double lr_rotation = 1e-3;
  double lr_axis = 8e-4;
  AdamMoments moments;
  bool use_dis = true;
  bool use_pen = true;
  bool use_spen = true;
  bool use_sup = true;
  bool penetration_on_hand_samples = false;  // default: contact points only
  size_t hand_samples = 512;
  uint64_t seed = 0;

  // Throws InvalidParams.
  void validate() const;
};

struct EnergyBreakdown {
  int iteration = 0;
  double l_dis = 0.0;
  double l_pen = 0.0;
  double l_spen = 0.0;
  double l_sup = 0.0;
  double total = 0.0;
};

// Mean |SDF| over the points.
double loss_dis(std::span<const Vec3> points, const MeshSdf& sdf);
// Mean of -min(SDF, 0) over the points.
double loss_pen(std::span<const Vec3> points, const MeshSdf& sdf);

// Hinge max(delta - |x - y|, 0) summed over ordered pairs and divided by
// n (n - 1). A pair is skipped when its segments are equal or parent and
// child; an empty `segments` span exempts nothing.
double loss_spen(std::span<const Vec3> points, std::span<const int> segments,
                 const std::array<int, kNumJoints>& parents, double delta);
double loss_spen(std::span<const Vec3> points, double delta);

// Euclidean norm of the difference. Throws InvalidParams unless both have 45
// entries.
double loss_sup(const Eigen::VectorXd& current, const Eigen::VectorXd& reference);

// Everything the contact stage needs, with the object frozen in the camera
// frame.
struct ContactProblem {
  const HandRig* rig = nullptr;
  HandParams init;
  PoseVector reference = PoseVector::Zero();  // estimated joint values
  ContactDesignation contacts;
  TriMesh object;
};

struct EnergyGradient {
  EnergyBreakdown energy;
  DofVector dis = DofVector::Zero();  // unweighted per-term gradients
  DofVector pen = DofVector::Zero();
  DofVector spen = DofVector::Zero();
  DofVector sup = DofVector::Zero();
  DofVector total = DofVector::Zero();  // weighted, disabled terms dropped
};

// Weighted contact energy over the hand dofs. Hand surface samples are drawn once on
// the shaped rest mesh and carried by barycentric coordinates.
class ContactEnergy {
 public:
  ContactEnergy(const ContactProblem& problem, const ContactConfig& cfg);

  EnergyBreakdown evaluate(const HandParams& params) const;
  EnergyGradient evaluate_with_gradient(const HandParams& params) const;

  const MeshSdf& object_sdf() const { return sdf_; }
  const std::vector<PointSample>& hand_samples() const { return samples_; }
  const std::vector<int>& sample_segments() const { return segments_; }

 private:
  EnergyGradient compute(const HandParams& params, bool with_gradient) const;

  const HandRig* rig_;
  ContactConfig cfg_;
  PoseVector reference_;
  std::vector<int> contact_ids_;
  MeshSdf sdf_;
  std::vector<PointSample> samples_;
  std::vector<int> segments_;
};

struct RefineResult {
  HandParams params;
  std::vector<EnergyBreakdown> trace;  // iterations + 1 rows
  int best_iteration = 0;
};

// Adam over (global rotation, translation, joints) with one learning rate per
// group; returns the lowest-energy iterate. Shape stays fixed.
RefineResult refine_grasp(const ContactProblem& problem, const ContactConfig& cfg);

}  // namespace grasp

#endif  // GRASP_CONTACT_HPP
