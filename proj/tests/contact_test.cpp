#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "grasp/contact.hpp"
#include "grasp/errors.hpp"
#include "grasp/primitives.hpp"
#include "grasp/toy_grasp.hpp"

namespace grasp {
namespace {

const HandRig& rig() {
  static const HandRig r = builtin_capsule_hand();
  return r;
}

const MeshSdf& unit_box() {
  static const MeshSdf sdf(make_box(Vec3(1, 1, 1), 2));
  return sdf;
}

// Toy grasp with the hand jittered toward the sphere and the reference moved
// off the current joints, so every term is active.
ContactProblem jittered_problem(uint64_t seed, HandParams& params) {
  ToyGraspSpec spec;
  spec.seed = seed;
  ToyGrasp toy = toy_sphere_grasp(rig(), spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  params = toy.truth;
  for (int i = 0; i < 3; ++i) params.global_pose[i] += 0.02 * n(rng);
  for (int i = 3; i < 6; ++i) params.global_pose[i] += 0.004 * n(rng);
  params.global_pose[4] += 0.003;
  for (int i = 0; i < kNumPoseParams; ++i) params.joint_pose[i] += 0.1 * n(rng);
  for (int i = 0; i < kNumPoseParams; ++i) toy.problem.reference[i] += 0.05 * n(rng);
  toy.problem.init = params;
  return toy.problem;
}

double relative_error(const DofVector& analytic, const DofVector& numeric) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-8);
}

TEST(LossDisTest, Examples) {
  const std::vector<Vec3> on = {Vec3(0.5, 0.1, 0.2), Vec3(-0.1, 0.5, 0.0)};
  EXPECT_NEAR(loss_dis(on, unit_box()), 0.0, 1e-9);
  const std::vector<Vec3> outside = {Vec3(0.505, 0.1, 0.2)};
  EXPECT_NEAR(loss_dis(outside, unit_box()), 0.005, 1e-9);
  const std::vector<Vec3> inside = {Vec3(0.495, 0.1, 0.2)};
  EXPECT_NEAR(loss_dis(inside, unit_box()), 0.005, 1e-9);
}

TEST(LossPenTest, Examples) {
  std::vector<Vec3> pts(10, Vec3(0.6, 0.0, 0.0));
  EXPECT_EQ(loss_pen(pts, unit_box()), 0.0);
  pts[3] = Vec3(0.0, 0.497, 0.1);
  EXPECT_NEAR(loss_pen(pts, unit_box()), 0.0003, 1e-9);
  pts[3] = Vec3(0.0, 0.5, 0.1);
  EXPECT_EQ(loss_pen(pts, unit_box()), 0.0);
  EXPECT_THROW(loss_pen(std::vector<Vec3>{}, unit_box()), GraspError);
}

TEST(LossSpenTest, Examples) {
  const std::vector<Vec3> far = {Vec3(0, 0, 0), Vec3(0.02, 0, 0), Vec3(0, 0.03, 0)};
  EXPECT_EQ(loss_spen(far, 0.01), 0.0);
  const std::vector<Vec3> close = {Vec3(0, 0, 0), Vec3(0.005, 0, 0)};
  EXPECT_NEAR(loss_spen(close, 0.01), 0.005, 1e-12);
  const std::vector<int> same = {4, 4}, parent_child = {4, 5}, apart = {1, 4};
  EXPECT_EQ(loss_spen(close, same, kManoParents, 0.01), 0.0);
  EXPECT_EQ(loss_spen(close, parent_child, kManoParents, 0.01), 0.0);
  EXPECT_NEAR(loss_spen(close, apart, kManoParents, 0.01), 0.005, 1e-12);
}

TEST(LossSpenTest, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.03, 0.03);
  std::uniform_int_distribution<int> seg(0, kNumJoints - 1);
  std::vector<Vec3> pts(300);
  std::vector<int> segs(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    pts[i] = Vec3(u(rng), u(rng), u(rng));
    segs[i] = seg(rng);
  }
  double sum = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = 0; j < pts.size(); ++j) {
      if (i == j || segs[i] == segs[j] || kManoParents[segs[i]] == segs[j] || kManoParents[segs[j]] == segs[i]) continue;
      sum += std::max(0.01 - (pts[i] - pts[j]).norm(), 0.0);
    }
  }
  const double n = static_cast<double>(pts.size());
  EXPECT_NEAR(loss_spen(pts, segs, kManoParents, 0.01), sum / (n * (n - 1)), 1e-15);
}

TEST(LossSpenTest, RestPoseIsSeparatedAndRigidInvariant) {
  ContactProblem problem;
  problem.rig = &rig();
  problem.contacts = ContactDesignation::from_regions(rig(), {"index_tip"});
  problem.object = make_icosphere(0.02, 2).translated(Vec3(0, 0.5, 0));
  const ContactEnergy energy(problem, ContactConfig{});
  EXPECT_EQ(energy.evaluate(HandParams{}).l_spen, 0.0);

  HandParams curled;
  for (int j = 1; j < kNumJoints; ++j) curled.joint_pose.segment<3>(3 * (j - 1)) = Vec3(0.05 * j, -0.1, 0.8);
  const double base = energy.evaluate(curled).l_spen;
  EXPECT_GT(base, 0.0);
  HandParams moved = compose(RigidTransform::from_axis_angle(Vec3(0.3, -1.1, 0.4), Vec3(0.2, -0.1, 0.05)), curled,
                             rig());
  EXPECT_NEAR(energy.evaluate(moved).l_spen, base, 1e-9);
}

TEST(LossSupTest, Examples) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(45), b = Eigen::VectorXd::Zero(45);
  EXPECT_EQ(loss_sup(a, a), 0.0);
  b[0] = 0.3;
  b[1] = 0.4;
  EXPECT_NEAR(loss_sup(a, b), 0.5, 1e-15);
  EXPECT_EQ(loss_sup(a, b), loss_sup(b, a));
  EXPECT_THROW(loss_sup(Eigen::VectorXd::Zero(44), b), GraspError);
}

TEST(ContactEnergyTest, AnalyticGradientsMatchFiniteDifferences) {
  const double h = 1e-6;
  for (uint64_t seed = 0; seed < 4; ++seed) {
    HandParams params;
    const ContactProblem problem = jittered_problem(seed, params);
    const ContactEnergy energy(problem, ContactConfig{});
    const EnergyGradient g = energy.evaluate_with_gradient(params);
    DofVector fd_dis, fd_pen, fd_spen, fd_sup, fd_total;
    for (int k = 0; k < kNumHandDofs; ++k) {
      HandParams plus = params, minus = params;
      DofVector d = params.dofs();
      d[k] += h;
      plus.set_dofs(d);
      d[k] -= 2 * h;
      minus.set_dofs(d);
      const EnergyBreakdown a = energy.evaluate(plus), b = energy.evaluate(minus);
      fd_dis[k] = (a.l_dis - b.l_dis) / (2 * h);
      fd_pen[k] = (a.l_pen - b.l_pen) / (2 * h);
      fd_spen[k] = (a.l_spen - b.l_spen) / (2 * h);
      fd_sup[k] = (a.l_sup - b.l_sup) / (2 * h);
      fd_total[k] = (a.total - b.total) / (2 * h);
    }
    EXPECT_GT(g.energy.l_pen, 0.0) << "seed " << seed;
    EXPECT_LE(relative_error(g.dis, fd_dis), 1e-3) << "seed " << seed;
    EXPECT_LE(relative_error(g.pen, fd_pen), 1e-3) << "seed " << seed;
    EXPECT_LE(relative_error(g.spen, fd_spen), 1e-3) << "seed " << seed;
    EXPECT_LE(relative_error(g.sup, fd_sup), 1e-3) << "seed " << seed;
    EXPECT_LE(relative_error(g.total, fd_total), 1e-3) << "seed " << seed;
  }
}

TEST(ContactEnergyTest, SelfPenetrationGradientMatchesFiniteDifferences) {
  ContactProblem problem;
  problem.rig = &rig();
  problem.contacts = ContactDesignation::from_regions(rig(), {"index_tip"});
  problem.object = make_icosphere(0.02, 2).translated(Vec3(0, 0.5, 0));
  const ContactEnergy energy(problem, ContactConfig{});
  HandParams p;
  for (int j = 1; j < kNumJoints; ++j) p.joint_pose.segment<3>(3 * (j - 1)) = Vec3(0.05 * j, -0.1, 0.8);
  const EnergyGradient g = energy.evaluate_with_gradient(p);
  ASSERT_GT(g.energy.l_spen, 0.0);
  DofVector fd;
  for (int k = 0; k < kNumHandDofs; ++k) {
    DofVector d = p.dofs();
    HandParams plus = p, minus = p;
    d[k] += 1e-6;
    plus.set_dofs(d);
    d[k] -= 2e-6;
    minus.set_dofs(d);
    fd[k] = (energy.evaluate(plus).l_spen - energy.evaluate(minus).l_spen) / 2e-6;
  }
  EXPECT_LE(relative_error(g.spen, fd), 1e-3);
}

TEST(ContactEnergyTest, DisabledTermsAreLoggedWithoutWeight) {
  HandParams params;
  const ContactProblem problem = jittered_problem(1, params);
  ContactConfig cfg;
  const EnergyGradient full = ContactEnergy(problem, cfg).evaluate_with_gradient(params);
  EXPECT_NEAR(full.energy.total,
              full.energy.l_dis + cfg.lambda_pen * full.energy.l_pen + cfg.lambda_spen * full.energy.l_spen +
                  cfg.lambda_sup * full.energy.l_sup,
              1e-12);
  cfg.use_dis = false;
  cfg.use_sup = false;
  const EnergyGradient part = ContactEnergy(problem, cfg).evaluate_with_gradient(params);
  EXPECT_EQ(part.energy.l_dis, full.energy.l_dis);
  EXPECT_EQ(part.energy.l_sup, full.energy.l_sup);
  EXPECT_NEAR(part.energy.total, cfg.lambda_pen * part.energy.l_pen + cfg.lambda_spen * part.energy.l_spen, 1e-12);
  EXPECT_LE((part.total - cfg.lambda_pen * part.pen - cfg.lambda_spen * part.spen).norm(), 1e-12);
}

TEST(ContactEnergyTest, PenetrationIsZeroExactlyWhenNothingIsInside) {
  HandParams params;
  ToyGrasp toy = toy_sphere_grasp(rig(), ToyGraspSpec{});
  const ContactEnergy energy(toy.problem, ContactConfig{});
  const auto contacts = contact_points(rig(), toy.problem.init, toy.problem.contacts);
  bool inside = false;
  for (const PointSample& s : contacts) inside = inside || energy.object_sdf().value(s.position) < 0.0;
  EXPECT_EQ(energy.evaluate(toy.problem.init).l_pen == 0.0, !inside);
  const ContactProblem pressed = jittered_problem(2, params);
  EXPECT_GT(ContactEnergy(pressed, ContactConfig{}).evaluate(params).l_pen, 0.0);
}

TEST(RefineGraspTest, ZeroIterationsReturnsInput) {
  HandParams params;
  const ContactProblem problem = jittered_problem(0, params);
  ContactConfig cfg;
  cfg.iterations = 0;
  const RefineResult r = refine_grasp(problem, cfg);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.params.dofs(), params.dofs());
}

TEST(RefineGraspTest, AllTermsDisabledLeavesParamsUnchanged) {
  HandParams params;
  const ContactProblem problem = jittered_problem(0, params);
  ContactConfig cfg;
  cfg.iterations = 20;
  cfg.use_dis = cfg.use_pen = cfg.use_spen = cfg.use_sup = false;
  const RefineResult r = refine_grasp(problem, cfg);
  EXPECT_EQ(r.params.dofs(), params.dofs());
  ASSERT_EQ(r.trace.size(), 21u);
  for (const EnergyBreakdown& e : r.trace) EXPECT_EQ(e.total, 0.0);
}

TEST(RefineGraspTest, ToyGraspClosesTheGap) {
  const ToyGrasp toy = toy_sphere_grasp(rig(), ToyGraspSpec{});
  const ContactConfig cfg;
  const RefineResult r = refine_grasp(toy.problem, cfg);
  ASSERT_EQ(r.trace.size(), 2001u);
  EXPECT_LE(r.trace[r.best_iteration].total, r.trace.front().total);
  for (const EnergyBreakdown& e : r.trace) {
    EXPECT_NEAR(e.total,
                e.l_dis + cfg.lambda_pen * e.l_pen + cfg.lambda_spen * e.l_spen + cfg.lambda_sup * e.l_sup, 1e-9);
  }
  const MeshSdf sdf(toy.problem.object);
  double mean = 0.0;
  const auto contacts = contact_points(rig(), r.params, toy.problem.contacts);
  for (const PointSample& s : contacts) mean += std::abs(sdf.value(s.position));
  EXPECT_LE(mean / static_cast<double>(contacts.size()), 0.002);
}

TEST(RefineGraspTest, Errors) {
  ToyGrasp toy = toy_sphere_grasp(rig(), ToyGraspSpec{});
  ContactProblem empty = toy.problem;
  empty.contacts.vertices.clear();
  try {
    refine_grasp(empty, ContactConfig{});
    FAIL();
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyContactSet);
  }
  ContactConfig bad;
  bad.delta = 0.0;
  EXPECT_THROW(refine_grasp(toy.problem, bad), GraspError);
  ContactProblem nan = toy.problem;
  nan.init.global_pose[3] = std::nan("");
  EXPECT_THROW(refine_grasp(nan, ContactConfig{}), GraspError);
}

TEST(ToyGraspTest, TruthTouchesWithoutEnteringAndInitFloats) {
  const ToyGrasp toy = toy_sphere_grasp(rig(), ToyGraspSpec{});
  const MeshSdf sdf(toy.problem.object);
  double truth = 0.0, init = 0.0;
  const auto a = contact_points(rig(), toy.truth, toy.problem.contacts);
  const auto b = contact_points(rig(), toy.problem.init, toy.problem.contacts);
  for (size_t i = 0; i < a.size(); ++i) {
    truth += std::abs(sdf.value(a[i].position));
    init += std::abs(sdf.value(b[i].position));
  }
  EXPECT_LE(truth / static_cast<double>(a.size()), 0.003);
  EXPECT_GE(init / static_cast<double>(b.size()), 0.008);
  EXPECT_EQ((toy.problem.init.translation() - toy.truth.translation()).norm(), 0.02);
  const ToyGrasp again = toy_sphere_grasp(rig(), ToyGraspSpec{});
  EXPECT_EQ(again.truth.dofs(), toy.truth.dofs());
}

}  // namespace
}  // namespace grasp
