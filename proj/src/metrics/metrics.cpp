#include "grasp/metrics.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <json.hpp>

#include "grasp/errors.hpp"
#include "grasp/rigid.hpp"
#include "grasp/sampling.hpp"
#include "grasp/voxel.hpp"

namespace grasp {
namespace {

void require_nonempty(const TriMesh& a, const TriMesh& b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kInvalidMesh, "metric needs two nonempty meshes");
}

// Distances from seeded samples of `from` to the surface of `to`.
std::vector<double> directed_distances(const TriMesh& from, const AccelIndex& to, size_t samples, uint64_t seed) {
  std::vector<double> d;
  d.reserve(samples);
  for (const PointSample& s : sample_surface(from, samples, seed)) d.push_back(unsigned_distance(to, s.position).value);
  return d;
}

double fraction_within(const std::vector<double>& d, double threshold) {
  size_t n = 0;
  for (double x : d) n += x <= threshold ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(d.size());
}

double mean(const std::vector<double>& d) {
  double s = 0.0;
  for (double x : d) s += x;
  return s / static_cast<double>(d.size());
}

struct MassProperties {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();  // about the center of mass, body frame
};

MassProperties mass_properties(const TriMesh& object, double density, double voxel_size) {
  const OccupancyGrid grid = voxelize_occupancy(object, voxel_size);
  std::vector<Vec3> centers;
  const auto& dims = grid.spec.dims;
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        if (grid.occupied[grid.index(i, j, k)]) centers.push_back(grid.spec.center(i, j, k));
      }
    }
  }
  if (centers.empty()) fail(ErrorCode::kInvalidMesh, "object has no voxel volume at this resolution");
  MassProperties mp;
  const double cell_mass = density * voxel_size * voxel_size * voxel_size;
  mp.mass = cell_mass * static_cast<double>(centers.size());
  for (const Vec3& c : centers) mp.com += c;
  mp.com /= static_cast<double>(centers.size());
  for (const Vec3& c : centers) {
    const Vec3 r = c - mp.com;
    mp.inertia += cell_mass * (r.squaredNorm() * Mat3::Identity() - r * r.transpose());
  }
  mp.inertia += cell_mass * voxel_size * voxel_size / 6.0 * static_cast<double>(centers.size()) * Mat3::Identity();
  return mp;
}

}  // namespace

double fscore(const TriMesh& pred, const TriMesh& gt, double threshold_mm, size_t samples, uint64_t seed) {
  require_nonempty(pred, gt);
  if (samples == 0 || !(threshold_mm >= 0.0)) fail(ErrorCode::kInvalidParams, "invalid F-score settings");
  const double t = threshold_mm / 1000.0;
  const double precision = fraction_within(directed_distances(pred, build_bvh(gt), samples, seed), t);
  const double recall = fraction_within(directed_distances(gt, build_bvh(pred), samples, seed), t);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double chamfer_3d(const TriMesh& pred, const TriMesh& gt, size_t samples, uint64_t seed) {
  require_nonempty(pred, gt);
  if (samples == 0) fail(ErrorCode::kInvalidParams, "chamfer needs samples");
  const double forward = mean(directed_distances(pred, build_bvh(gt), samples, seed));
  const double backward = mean(directed_distances(gt, build_bvh(pred), samples, seed));
  return 1000.0 * 0.5 * (forward + backward);
}

double solid_intersection_volume(const TriMesh& a, const TriMesh& b, double voxel_size) {
  require_nonempty(a, b);
  if (!a.watertight() || !b.watertight()) {
    fail(ErrorCode::kSignRequiresWatertight, "intersection volume needs closed meshes");
  }
  if (!(voxel_size > 0.0)) fail(ErrorCode::kInvalidParams, "voxel size must be positive");
  const Aabb box = Aabb::intersection(a.bounds(), b.bounds());
  if (box.empty()) return 0.0;
  const GridSpec spec = GridSpec::covering(box, voxel_size, 0);
  const OccupancyGrid ga = occupancy_on_grid(a, spec);
  const OccupancyGrid gb = occupancy_on_grid(b, spec);
  size_t both = 0;
  for (size_t i = 0; i < ga.occupied.size(); ++i) both += (ga.occupied[i] && gb.occupied[i]) ? 1 : 0;
  return static_cast<double>(both) * voxel_size * voxel_size * voxel_size * 1e6;
}

double contact_ratio(std::span<const Vec3> points, const MeshSdf& object, double tau) {
  if (points.empty()) fail(ErrorCode::kEmptyContactSet, "contact ratio needs contact points");
  size_t n = 0;
  for (const Vec3& p : points) n += object.unsigned_value(p) <= tau ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(points.size());
}

double ipi(double cr, double siv_table_units) {
  if (!(cr >= 0.0 && cr <= 1.0) || !(siv_table_units >= 0.0)) fail(ErrorCode::kInvalidParams, "invalid IPI inputs");
  return cr / std::exp(siv_table_units);
}

double simulation_displacement(const TriMesh& hand, const TriMesh& object, const SimulationConfig& cfg) {
  require_nonempty(hand, object);
  if (!hand.watertight() || !object.watertight()) {
    fail(ErrorCode::kSignRequiresWatertight, "drop test needs closed meshes");
  }
  if (!(cfg.dt > 0.0) || !(cfg.duration >= 0.0) || !(cfg.stiffness >= 0.0) || !(cfg.damping >= 0.0) ||
      cfg.samples == 0 || !(cfg.density > 0.0) || !(cfg.escape_cm > 0.0)) {
    fail(ErrorCode::kInvalidParams, "invalid simulation settings");
  }
  const MassProperties mp = mass_properties(object, cfg.density, cfg.voxel_size);
  const Mat3 inertia_inv = mp.inertia.inverse();
  std::vector<Vec3> body;
  for (const PointSample& s : sample_surface(object, cfg.samples, cfg.seed)) body.push_back(s.position - mp.com);

  const MeshSdf hand_sdf(hand);
  const Aabb hand_box = hand.bounds();
  Vec3 x = mp.com, v = Vec3::Zero(), w = Vec3::Zero();
  Mat3 rot = Mat3::Identity();
  const double escape = cfg.escape_cm / 100.0;
  const long steps = std::lround(cfg.duration / cfg.dt);

  for (long step = 0; step < steps; ++step) {
    Vec3 force = mp.mass * cfg.gravity, torque = Vec3::Zero();
    for (const Vec3& r_body : body) {
      const Vec3 r = rot * r_body;
      const Vec3 p = x + r;
      if (!hand_box.contains(p)) continue;
      const SdfResult q = hand_sdf.query(p);
      if (q.value >= 0.0) continue;
      const Vec3 vp = v + w.cross(r);
      const double fn = cfg.stiffness * (-q.value) - cfg.damping * vp.dot(q.gradient);
      if (fn <= 0.0) continue;
      force += fn * q.gradient;
      torque += r.cross(fn * q.gradient);
    }
    const Mat3 iw = rot * mp.inertia * rot.transpose();
    const Mat3 iw_inv = rot * inertia_inv * rot.transpose();
    v += cfg.dt * force / mp.mass;
    w += cfg.dt * iw_inv * (torque - w.cross(iw * w));
    x += cfg.dt * v;
    rot = axis_angle_to_matrix(cfg.dt * w) * rot;
    if (step % 64 == 63) rot = orthonormalize(rot);
    if (!x.allFinite() || !v.allFinite() || !w.allFinite()) {
      fail(ErrorCode::kSimulationDiverged, "drop test state is not finite");
    }
    if ((x - mp.com).norm() >= escape) return cfg.escape_cm;
  }
  return std::min(100.0 * (x - mp.com).norm(), cfg.escape_cm);
}

std::string MetricReport::to_json() const {
  const nlohmann::ordered_json j = {{"f5", f5}, {"f10", f10}, {"cd", cd},   {"siv", siv},
                                    {"siv_table", siv_table}, {"cr", cr},  {"sd", sd}, {"ipi", ipi}};
  return j.dump();
}

}  // namespace grasp
