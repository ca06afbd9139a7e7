#include "grasp/contact.hpp"

#include <cmath>
#include <unordered_map>

#include "grasp/errors.hpp"

namespace grasp {
namespace {

struct CellKey {
  int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  size_t operator()(const CellKey& k) const {
    return static_cast<size_t>(k.x * 73856093) ^ static_cast<size_t>(k.y * 19349663) ^
           static_cast<size_t>(k.z * 83492791);
  }
};

CellKey cell_of(const Vec3& p, double size) {
  return {static_cast<int64_t>(std::floor(p.x() / size)), static_cast<int64_t>(std::floor(p.y() / size)),
          static_cast<int64_t>(std::floor(p.z() / size))};
}

bool exempt_pair(int a, int b, const std::array<int, kNumJoints>& parents) {
  return a == b || parents[a] == b || parents[b] == a;
}

// Calls f(i, j, diff, dist) once per unordered pair closer than delta that is
// not exempt. Pairs are visited in a fixed order.
template <typename F>
void for_each_close_pair(std::span<const Vec3> points, std::span<const int> segments,
                         const std::array<int, kNumJoints>& parents, double delta, F&& f) {
  std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
  for (size_t i = 0; i < points.size(); ++i) grid[cell_of(points[i], delta)].push_back(static_cast<int>(i));
  for (size_t i = 0; i < points.size(); ++i) {
    const CellKey c = cell_of(points[i], delta);
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (int j : it->second) {
            if (j <= static_cast<int>(i)) continue;
            if (!segments.empty() && exempt_pair(segments[i], segments[j], parents)) continue;
            const Vec3 diff = points[i] - points[j];
            const double dist = diff.norm();
            if (dist < delta) f(static_cast<int>(i), j, diff, dist);
          }
        }
      }
    }
  }
}

void check_points(std::span<const Vec3> points) {
  if (points.empty()) fail(ErrorCode::kInvalidParams, "loss needs at least one point");
}

}  // namespace

void ContactConfig::validate() const {
  if (!(lambda_pen >= 0.0) || !(lambda_spen >= 0.0) || !(lambda_sup >= 0.0)) {
    fail(ErrorCode::kInvalidParams, "contact weights must be nonnegative");
  }
  if (!(delta > 0.0) || iterations < 0 || !(lr_translate > 0.0) || !(lr_rotation > 0.0) || !(lr_axis > 0.0) ||
      hand_samples < 2) {
    fail(ErrorCode::kInvalidParams, "contact settings must be positive");
  }
}

double loss_dis(std::span<const Vec3> points, const MeshSdf& sdf) {
  check_points(points);
  double sum = 0.0;
  for (const Vec3& p : points) sum += std::abs(sdf.value(p));
  return sum / static_cast<double>(points.size());
}

double loss_pen(std::span<const Vec3> points, const MeshSdf& sdf) {
  check_points(points);
  double sum = 0.0;
  for (const Vec3& p : points) sum += -std::min(sdf.value(p), 0.0);
  return sum / static_cast<double>(points.size());
}

double loss_spen(std::span<const Vec3> points, std::span<const int> segments,
                 const std::array<int, kNumJoints>& parents, double delta) {
  if (points.size() < 2) fail(ErrorCode::kInvalidParams, "self-penetration needs two points");
  if (!segments.empty() && segments.size() != points.size()) {
    fail(ErrorCode::kInvalidParams, "one segment label per point");
  }
  if (!(delta > 0.0)) fail(ErrorCode::kInvalidParams, "delta must be positive");
  double sum = 0.0;
  for_each_close_pair(points, segments, parents, delta,
                      [&](int, int, const Vec3&, double dist) { sum += 2.0 * (delta - dist); });
  const double n = static_cast<double>(points.size());
  return sum / (n * (n - 1.0));
}

double loss_spen(std::span<const Vec3> points, double delta) { return loss_spen(points, {}, kManoParents, delta); }

double loss_sup(const Eigen::VectorXd& current, const Eigen::VectorXd& reference) {
  if (current.size() != kNumPoseParams || reference.size() != kNumPoseParams) {
    fail(ErrorCode::kInvalidParams, "supervision needs two 45-vectors");
  }
  return (current - reference).norm();
}

ContactEnergy::ContactEnergy(const ContactProblem& problem, const ContactConfig& cfg)
    : rig_(problem.rig), cfg_(cfg), reference_(problem.reference), sdf_(problem.object) {
  if (rig_ == nullptr) fail(ErrorCode::kInvalidParams, "contact problem has no hand rig");
  cfg_.validate();
  if (problem.contacts.vertices.empty()) fail(ErrorCode::kEmptyContactSet, "contact designation is empty");
  contact_ids_ = problem.contacts.vertices;

  HandParams rest;
  rest.shape = problem.init.shape;
  const TriMesh rest_mesh = pose_hand(*rig_, rest);
  samples_ = farthest_point_sample(rest_mesh, cfg_.hand_samples, cfg_.seed, SampleSource::kHandSurface);
  segments_.reserve(samples_.size());
  for (const PointSample& s : samples_) {
    const Tri& t = rest_mesh.triangles()[s.triangle];
    Eigen::RowVectorXd w = Eigen::RowVectorXd::Zero(kNumJoints);
    for (int k = 0; k < 3; ++k) w += s.barycentric[k] * rig_->weights().row(t[k]);
    Eigen::Index best = 0;
    w.maxCoeff(&best);
    segments_.push_back(static_cast<int>(best));
  }
}

EnergyGradient ContactEnergy::compute(const HandParams& params, bool with_gradient) const {
  const HandKinematics kin(*rig_, params);
  EnergyGradient g;

  std::vector<Vec3> contacts;
  contacts.reserve(contact_ids_.size());
  for (int id : contact_ids_) contacts.push_back(kin.vertex(id));
  std::vector<Vec3> samples;
  samples.reserve(samples_.size());
  for (const PointSample& s : samples_) samples.push_back(kin.point(s.triangle, s.barycentric));

  auto chain = [&](DofVector& target, size_t index, bool is_sample, const Vec3& dp) {
    const VertexJacobian jac = is_sample ? kin.point_jacobian(samples_[index].triangle, samples_[index].barycentric)
                                         : kin.vertex_jacobian(contact_ids_[index]);
    target += jac.transpose() * dp;
  };

  const double nc = static_cast<double>(contacts.size());
  for (size_t i = 0; i < contacts.size(); ++i) {
    const SdfResult r = sdf_.query(contacts[i]);
    g.energy.l_dis += std::abs(r.value) / nc;
    if (with_gradient && r.value != 0.0) chain(g.dis, i, false, (r.value > 0.0 ? 1.0 : -1.0) / nc * r.gradient);
    if (!cfg_.penetration_on_hand_samples) {
      g.energy.l_pen += -std::min(r.value, 0.0) / nc;
      if (with_gradient && r.value < 0.0) chain(g.pen, i, false, -r.gradient / nc);
    }
  }
  if (cfg_.penetration_on_hand_samples) {
    const double ns = static_cast<double>(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
      const SdfResult r = sdf_.query(samples[i]);
      g.energy.l_pen += -std::min(r.value, 0.0) / ns;
      if (with_gradient && r.value < 0.0) chain(g.pen, i, true, -r.gradient / ns);
    }
  }

  const double n = static_cast<double>(samples.size());
  const double pair_norm = 1.0 / (n * (n - 1.0));
  std::vector<Vec3> sample_grad(with_gradient ? samples.size() : 0, Vec3::Zero());
  double spen = 0.0;
  for_each_close_pair(samples, segments_, rig_->parents(), cfg_.delta,
                      [&](int i, int j, const Vec3& diff, double dist) {
                        spen += 2.0 * (cfg_.delta - dist);
                        if (!with_gradient || dist <= 0.0) return;
                        const Vec3 u = 2.0 * pair_norm * diff / dist;
                        sample_grad[i] -= u;
                        sample_grad[j] += u;
                      });
  g.energy.l_spen = spen * pair_norm;
  if (with_gradient) {
    for (size_t i = 0; i < sample_grad.size(); ++i) {
      if (!sample_grad[i].isZero(0.0)) chain(g.spen, i, true, sample_grad[i]);
    }
  }

  const PoseVector diff = params.joint_pose - reference_;
  g.energy.l_sup = diff.norm();
  if (with_gradient && g.energy.l_sup > 0.0) g.sup.tail<kNumPoseParams>() = diff / g.energy.l_sup;

  const double w_dis = cfg_.use_dis ? 1.0 : 0.0;
  const double w_pen = cfg_.use_pen ? cfg_.lambda_pen : 0.0;
  const double w_spen = cfg_.use_spen ? cfg_.lambda_spen : 0.0;
  const double w_sup = cfg_.use_sup ? cfg_.lambda_sup : 0.0;
  g.energy.total =
      w_dis * g.energy.l_dis + w_pen * g.energy.l_pen + w_spen * g.energy.l_spen + w_sup * g.energy.l_sup;
  if (with_gradient) g.total = w_dis * g.dis + w_pen * g.pen + w_spen * g.spen + w_sup * g.sup;
  return g;
}

EnergyBreakdown ContactEnergy::evaluate(const HandParams& params) const { return compute(params, false).energy; }

EnergyGradient ContactEnergy::evaluate_with_gradient(const HandParams& params) const {
  return compute(params, true);
}

RefineResult refine_grasp(const ContactProblem& problem, const ContactConfig& cfg) {
  problem.init.validate();
  const ContactEnergy energy(problem, cfg);

  auto checked = [](EnergyGradient g) {
    if (!std::isfinite(g.energy.total) || !g.total.allFinite()) {
      fail(ErrorCode::kDivergedOptimization, "contact energy is not finite");
    }
    return g;
  };

  RefineResult result;
  HandParams params = problem.init;
  EnergyGradient current = checked(energy.evaluate_with_gradient(params));
  result.trace.push_back(current.energy);
  result.params = params;
  double best = current.energy.total;

  Eigen::VectorXd lr(kNumHandDofs);
  lr.head<3>().setConstant(cfg.lr_rotation);
  lr.segment<3>(3).setConstant(cfg.lr_translate);
  lr.tail<kNumPoseParams>().setConstant(cfg.lr_axis);
  Adam adam(lr, cfg.moments);

  for (int it = 1; it <= cfg.iterations; ++it) {
    params.set_dofs(params.dofs() + adam.step(current.total));
    current = checked(energy.evaluate_with_gradient(params));
    current.energy.iteration = it;
    result.trace.push_back(current.energy);
    if (current.energy.total < best) {
      best = current.energy.total;
      result.best_iteration = it;
      result.params = params;
    }
  }
  return result;
}

}  // namespace grasp
