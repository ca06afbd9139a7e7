#ifndef GRASP_METRICS_HPP
#define GRASP_METRICS_HPP

#include <cstdint>
#include <span>
#include <string>

#include "grasp/mesh.hpp"
#include "grasp/sdf.hpp"

namespace grasp {

inline constexpr double kDefaultContactTau = 0.005;
inline constexpr double kDefaultSivVoxel = 0.0025;
inline constexpr size_t kDefaultMetricSamples = 10000;

// F-score of seeded area samples at `threshold_mm`.
double fscore(const TriMesh& pred, const TriMesh& gt, double threshold_mm, size_t samples = kDefaultMetricSamples,
              uint64_t seed = 0);

// Mean of the two directed mean point-to-surface distances, in millimeters.
double chamfer_3d(const TriMesh& pred, const TriMesh& gt, size_t samples = kDefaultMetricSamples, uint64_t seed = 0);

// Volume in cm^3 of voxel centers inside both meshes, on one grid over the
// intersection of their bounds. Throws SignRequiresWatertight.
double solid_intersection_volume(const TriMesh& a, const TriMesh& b, double voxel_size = kDefaultSivVoxel);

// Fraction of points with |SDF| <= tau.
double contact_ratio(std::span<const Vec3> points, const MeshSdf& object, double tau = kDefaultContactTau);

// cr / exp(siv), with siv in units of 100 cm^3.
double ipi(double cr, double siv_table_units);

struct SimulationConfig {
  Vec3 gravity = Vec3(0.0, -9.81, 0.0);
  double duration = 1.0;   // seconds
  double dt = 1e-3;        // seconds
  double stiffness = 1e4;  // N/m per sample
  double damping = 10.0;   // N s/m per sample
  size_t samples = 256;
  double density = 1000.0;  // kg/m^3
  double voxel_size = kDefaultSivVoxel;
  double escape_cm = 500.0;
  uint64_t seed = 0;
};

// Drops the object under gravity with the hand held fixed: symplectic Euler
// on a rigid body with penalty forces along the hand SDF gradient at object
// surface samples inside the hand. Returns the center-of-mass displacement in
// cm, capped at cfg.escape_cm. Throws SimulationDiverged on a non-finite state.
double simulation_displacement(const TriMesh& hand, const TriMesh& object, const SimulationConfig& cfg = {});

struct MetricReport {
  double f5 = 0.0;
  double f10 = 0.0;
  double cd = 0.0;         // mm
  double siv = 0.0;        // cm^3
  double siv_table = 0.0;  // 100 cm^3
  double cr = 0.0;
  double sd = 0.0;  // cm
  double ipi = 0.0;

  std::string to_json() const;
};

}  // namespace grasp

#endif  // GRASP_METRICS_HPP
