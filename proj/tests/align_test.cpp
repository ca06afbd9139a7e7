#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "grasp/align.hpp"
#include "grasp/errors.hpp"
#include "grasp/hand.hpp"
#include "grasp/hull.hpp"
#include "grasp/primitives.hpp"

namespace grasp {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

CameraIntrinsics camera() { return CameraIntrinsics{500, 500, 250, 250, 500, 500}; }

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

struct PoseScene {
  TriMesh object;
  ObjectPose truth;
  ObjectPose init;
  MaskImage mask;
};

// Box with distinct side lengths at a random pose, perturbed by a rotation in
// [5, 15] degrees and a translation in [1, 3] cm.
PoseScene make_pose_scene(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PoseScene s;
  s.object = make_box(Vec3(0.09, 0.06, 0.035));
  s.truth.rigid = RigidTransform::from_axis_angle(random_unit(rng) * (u(rng) * std::numbers::pi),
                                                  Vec3(0.04 * (u(rng) - 0.5), 0.04 * (u(rng) - 0.5), 0.5));
  s.mask = rasterize_mask(s.object, s.truth, camera());
  const double angle = (5.0 + 10.0 * u(rng)) * kDeg;
  const double shift = 0.01 + 0.02 * u(rng);
  s.init = s.truth;
  s.init.rigid = RigidTransform(axis_angle_to_matrix(random_unit(rng) * angle) * s.truth.rigid.rotation(),
                                s.truth.rigid.translation() + shift * random_unit(rng));
  return s;
}

double max_abs_diff(const TriMesh& a, const TriMesh& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.num_vertices(); ++i) m = std::max(m, (a.vertex(i) - b.vertex(i)).cwiseAbs().maxCoeff());
  return m;
}

double projected_gap(const PoseScene& s, const ObjectPose& pose) {
  const auto pts = positions(farthest_point_sample(s.object, 1000, 0));
  return mean_nearest_distance(project_points(pts, pose, camera()).visible_points(), mask_foreground_points(s.mask));
}

TEST(ScaleAlignTest, HandExamples) {
  const TriMesh cube = make_box(Vec3::Ones());
  DetectionBoxes boxes{{0, 0, 10, 10}, {20, 20, 30, 30}};
  EXPECT_NEAR(initial_scale_align(cube, cube, boxes), 1.0, 1e-12);
  boxes.hand = {0, 0, 20, 20};
  EXPECT_NEAR(initial_scale_align(cube, cube, boxes), 0.5, 1e-12);
}

TEST(ScaleAlignTest, ScalingLaw) {
  const TriMesh hand = pose_hand(builtin_capsule_hand(), HandParams());
  const TriMesh mug = make_lathe_mug(0.04, 0.1, 0.005, 32);
  const DetectionBoxes boxes{{10, 20, 200, 260}, {150, 100, 260, 210}};
  const double k = initial_scale_align(hand, mug, boxes);
  for (double s : {2.0, 0.3, 7.5}) {
    const double ks = initial_scale_align(hand, mug.scaled_about(Vec3::Zero(), s), boxes);
    EXPECT_NEAR(ks / (k / s), 1.0, 1e-9);
  }
}

TEST(ScaleAlignTest, Errors) {
  const TriMesh cube = make_box(Vec3::Ones());
  try {
    initial_scale_align(cube, cube, DetectionBoxes{{0, 0, 10, 10}, {5, 5, 5, 9}});
    FAIL() << "expected InvalidBox";
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidBox);
  }
  try {
    initial_scale_align(cube, make_quad(1, 1, 0), DetectionBoxes{{0, 0, 10, 10}, {0, 0, 10, 10}});
    FAIL() << "expected DegenerateHull";
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateHull);
  }
}

TEST(InitObjectPoseTest, CentroidLandsOnHandCentroid) {
  const TriMesh hand = make_box(Vec3(0.1, 0.02, 0.08)).translated(Vec3(0, 0, 0.5));
  const TriMesh object = make_icosphere(0.2, 2).translated(Vec3(1, 2, 3));
  const DetectionBoxes boxes{{10, 10, 110, 110}, {50, 50, 100, 100}};
  const ObjectPose pose = init_object_pose(hand, object, boxes, 500, 500);
  EXPECT_EQ(pose.rigid.rotation(), Mat3::Identity());
  EXPECT_NEAR(pose.scale, initial_scale_align(hand, object, boxes), 1e-15);
  const Vec3 placed = pose.apply(object).centroid();
  EXPECT_LE((placed - Vec3(0, 0, 0.5)).norm(), 1e-9);
  EXPECT_GT(placed.z(), 0.0);

  // Already centered: the centroid does not move.
  const TriMesh centered = make_icosphere(0.03, 2).translated(hand.centroid());
  const ObjectPose same = init_object_pose(hand, centered, boxes, 500, 500);
  EXPECT_LE((same.apply(centered).centroid() - centered.centroid()).norm(), 1e-9);

  EXPECT_THROW(init_object_pose(hand, object, DetectionBoxes{{10, 10, 600, 110}, {50, 50, 100, 100}}, 500, 500),
               GraspError);
}

TEST(OpaTest, ZeroIterationsIsANoOp) {
  const PoseScene s = make_pose_scene(1);
  OpaConfig cfg;
  cfg.iterations = 0;
  const OpaResult r = optimize_object_pose(s.object, s.mask, camera(), s.init, cfg);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_LE((r.pose.rigid.rotation() - s.init.rigid.rotation()).norm(), 1e-12);
  EXPECT_EQ(r.pose.rigid.translation(), s.init.rigid.translation());
  EXPECT_EQ(r.best_loss, r.trace[0].total);
}

TEST(OpaTest, GroundTruthIsStable) {
  const PoseScene s = make_pose_scene(2);
  OpaConfig cfg;
  cfg.iterations = 60;
  const OpaResult r = optimize_object_pose(s.object, s.mask, camera(), s.truth, cfg, s.truth.apply(s.object.centroid()).z());
  EXPECT_LE(r.best_loss, r.trace[0].total);
  EXPECT_LT((r.pose.rigid.translation() - s.truth.rigid.translation()).norm(), 1e-3);
  EXPECT_LT(geodesic_angle(r.pose.rigid.rotation(), s.truth.rigid.rotation()), 1.0 * kDeg);
}

TEST(OpaTest, RecoversPerturbedPose) {
  for (uint64_t seed : {11u, 12u}) {
    const PoseScene s = make_pose_scene(seed);
    OpaConfig cfg;
    cfg.seed = seed;
    const double depth = s.truth.apply(s.object.centroid()).z();
    const OpaResult r = optimize_object_pose(s.object, s.mask, camera(), s.init, cfg, depth);
    EXPECT_EQ(r.trace.size(), 201u);
    EXPECT_LE(r.best_loss, r.trace[0].total);
    EXPECT_LE(projected_gap(s, r.pose), 2.0) << "seed " << seed;
    EXPECT_LE(geodesic_angle(r.pose.rigid.rotation(), s.truth.rigid.rotation()), 5.0 * kDeg) << "seed " << seed;
    const Mat3 rot = r.pose.rigid.rotation();
    EXPECT_NEAR(rot.determinant(), 1.0, 1e-9);
    EXPECT_LE((rot * rot.transpose() - Mat3::Identity()).norm(), 1e-9);
  }
}

TEST(OpaTest, TranslationOnlyKeepsRotation) {
  const PoseScene s = make_pose_scene(3);
  OpaConfig cfg;
  cfg.iterations = 20;
  cfg.translation_only = true;
  const OpaResult r = optimize_object_pose(s.object, s.mask, camera(), s.init, cfg);
  EXPECT_LE((r.pose.rigid.rotation() - s.init.rigid.rotation()).norm(), 1e-12);
}

TEST(OpaTest, ObjectBehindCameraIsOutsideFrustum) {
  const PoseScene s = make_pose_scene(4);
  ObjectPose behind = s.init;
  behind.rigid.set_translation(Vec3(0, 0, -1));
  try {
    optimize_object_pose(s.object, s.mask, camera(), behind, OpaConfig());
    FAIL() << "expected ObjectOutsideFrustum";
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kObjectOutsideFrustum);
  }
}

TEST(CandidateTest, DistancesAreLogSpaced) {
  const auto d = candidate_distances(0.5);
  ASSERT_EQ(d.size(), 32u);
  EXPECT_NEAR(d.front(), 0.125, 1e-15);
  EXPECT_NEAR(d.back(), 2.0, 1e-12);
  for (size_t i = 1; i < d.size(); ++i) {
    EXPECT_GT(d[i], d[i - 1]);
    EXPECT_NEAR(d[i] / d[i - 1], std::pow(16.0, 1.0 / 31.0), 1e-12);
  }
}

TEST(CandidateTest, ScalingAboutTheCameraOrigin) {
  const TriMesh object = make_lathe_mug(0.04, 0.1, 0.005, 32).translated(Vec3(0.05, -0.02, 0.45));
  const double norm = object.centroid().norm();
  const std::vector<double> d = {norm, 2 * norm};
  const CandidateSet set = generate_candidates(object, d);
  EXPECT_LE(max_abs_diff(set.items[0].mesh, object), 1e-15);
  for (size_t i = 0; i < object.num_vertices(); ++i) {
    EXPECT_LE((set.items[1].mesh.vertex(i) - 2.0 * object.vertex(i)).norm(), 1e-15);
  }
  const ProjectedSet a = project_points(object.vertices(), RigidTransform(), camera());
  const ProjectedSet b = project_points(set.items[1].mesh.vertices(), RigidTransform(), camera());
  for (size_t i = 0; i < a.points.size(); ++i) EXPECT_LE((a.points[i] - b.points[i]).norm(), 1e-9);

  const std::vector<double> fixed = {0.3, 0.5, 0.7};
  const CandidateSet three = generate_candidates(object, fixed);
  for (size_t i = 0; i < 3; ++i) EXPECT_NEAR(three.items[i].mesh.centroid().norm(), fixed[i], 1e-9);

  try {
    generate_candidates(make_icosphere(0.1, 1), d);
    FAIL() << "expected ObjectAtCameraOrigin";
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kObjectAtCameraOrigin);
  }
}

TEST(CandidateTest, SilhouetteLossIsInvariantAcrossCandidates) {
  std::mt19937_64 rng(21);
  const TriMesh base = make_box(Vec3(0.08, 0.05, 0.03));
  for (int scene = 0; scene < 3; ++scene) {
    ObjectPose pose;
    pose.rigid = RigidTransform::from_axis_angle(random_unit(rng), Vec3(0.02, -0.01, 0.5 + 0.1 * scene));
    const TriMesh placed = pose.apply(base);
    const MaskImage mask = rasterize_mask(base, pose, camera());
    const auto mask_pts = mask_foreground_points(mask);
    const CandidateSet set = generate_candidates(placed, candidate_distances(placed.centroid().norm()));
    auto loss = [&](const TriMesh& m) {
      const auto pts = positions(sample_surface(m, 1000, 7));
      return chamfer_2d(project_points(pts, RigidTransform(), camera()), mask_pts).normalized();
    };
    const double reference = loss(placed);
    for (const Candidate& c : set.items) EXPECT_NEAR(loss(c.mesh) / reference, 1.0, 1e-6);
  }
}

TEST(SelectCandidateTest, PicksTheNearestCandidate) {
  // Sphere of radius 0.1 |x_c| on the optical axis; the contact at z = 1 sits
  // 1 - 1.1 d from candidate d.
  const TriMesh sphere = make_icosphere(0.05, 5).translated(Vec3(0, 0, 0.5));
  const std::vector<double> d = {0.7 / 1.1, 0.9 / 1.1, 0.98 / 1.1};
  CandidateSet set = generate_candidates(sphere, d);
  PointSample contact;
  contact.position = Vec3(0, 0, 1);
  const std::vector<PointSample> contacts = {contact};
  EXPECT_EQ(select_candidate(set, contacts), 2u);
  EXPECT_NEAR(set.items[0].score, 0.30, 1e-3);
  EXPECT_NEAR(set.items[1].score, 0.10, 1e-3);
  EXPECT_NEAR(set.items[2].score, 0.02, 1e-3);

  CandidateSet single = generate_candidates(sphere, std::vector<double>{0.4});
  EXPECT_EQ(select_candidate(single, contacts), 0u);
}

TEST(SelectCandidateTest, TiesGoToTheSmallerDistance) {
  // Box faces at z = 0.45 f and 0.55 f: f = 1 and f = 1.45 / 0.45 are both 0.45 from z = 1.
  const TriMesh box = make_box(Vec3::Constant(0.1)).translated(Vec3(0, 0, 0.5));
  CandidateSet set = generate_candidates(box, std::vector<double>{0.5, 0.5 * 1.45 / 0.45});
  PointSample contact;
  contact.position = Vec3(0, 0, 1);
  const std::vector<PointSample> contacts = {contact};
  EXPECT_EQ(select_candidate(set, contacts), 0u);
  EXPECT_NEAR(set.items[0].score, set.items[1].score, 1e-12);
}

TEST(SelectCandidateTest, AppendingWorseCandidatesKeepsTheChoice) {
  const TriMesh mug = make_lathe_mug(0.04, 0.1, 0.005, 32).translated(Vec3(0.0, 0.0, 0.5));
  std::mt19937_64 rng(5);
  std::vector<PointSample> contacts(20);
  for (PointSample& c : contacts) c.position = Vec3(0, 0, 0.42) + 0.03 * random_unit(rng);
  const std::vector<double> few = {0.3, 0.4, 0.5, 0.6};
  CandidateSet a = generate_candidates(mug, few);
  const size_t best = select_candidate(a, contacts);
  std::vector<double> more = few;
  more.push_back(5.0);
  more.push_back(9.0);
  CandidateSet b = generate_candidates(mug, more);
  EXPECT_EQ(select_candidate(b, contacts), best);
}

TEST(AdamTest, PerGroupRatesAndBiasCorrection) {
  Eigen::VectorXd lr(2);
  lr << 0.1, 0.01;
  Adam adam(lr);
  Eigen::VectorXd g(2);
  g << 3.0, -0.5;
  // First bias-corrected step has magnitude lr regardless of gradient scale.
  const Eigen::VectorXd step = adam.step(g);
  EXPECT_NEAR(step[0], -0.1, 1e-8);
  EXPECT_NEAR(step[1], 0.01, 1e-8);

  // Minimizes a badly scaled quadratic.
  Eigen::VectorXd x(2);
  x << 1.0, -1.0;
  Adam opt(Eigen::VectorXd::Constant(2, 0.05));
  for (int i = 0; i < 2000; ++i) {
    Eigen::VectorXd grad(2);
    grad << 2e4 * x[0], 2e-2 * x[1];
    x += opt.step(grad);
  }
  EXPECT_LT(x.norm(), 1e-2);
}

}  // namespace
}  // namespace grasp
