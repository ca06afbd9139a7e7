#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "grasp/errors.hpp"
#include "grasp/hand.hpp"

namespace grasp {
namespace {

const HandRig& rig() {
  static const HandRig r = builtin_capsule_hand();
  return r;
}

HandParams random_params(std::mt19937_64& rng, double joint_sigma, bool shaped) {
  std::normal_distribution<double> n(0.0, 1.0);
  HandParams p;
  for (int i = 0; i < 3; ++i) p.global_pose[i] = 1.2 * n(rng);
  for (int i = 3; i < 6; ++i) p.global_pose[i] = 0.2 * n(rng);
  for (int i = 0; i < kNumPoseParams; ++i) p.joint_pose[i] = joint_sigma * n(rng);
  if (shaped) {
    for (int i = 0; i < kNumShapeParams; ++i) p.shape[i] = 0.5 * n(rng);
  }
  return p;
}

double max_deviation(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).norm());
  return m;
}

bool segment_crosses_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 d = q - p, e1 = b - a, e2 = c - a;
  const Vec3 h = d.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-18) return false;
  const Vec3 s = p - a;
  const double u = s.dot(h) / det;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = s.cross(e1);
  const double v = d.dot(qv) / det;
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = e2.dot(qv) / det;
  return t >= 0.0 && t <= 1.0;
}

// Triangle pairs that share no vertex and whose interiors cross.
size_t count_self_intersections(const TriMesh& m) {
  const size_t nt = m.num_triangles();
  std::vector<Aabb> boxes(nt);
  std::vector<size_t> order(nt);
  for (size_t t = 0; t < nt; ++t) {
    const auto [a, b, c] = m.corners(t);
    boxes[t].extend(a);
    boxes[t].extend(b);
    boxes[t].extend(c);
    order[t] = t;
  }
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return boxes[x].lo.x() < boxes[y].lo.x(); });
  size_t hits = 0;
  for (size_t i = 0; i < nt; ++i) {
    const size_t ti = order[i];
    for (size_t k = i + 1; k < nt && boxes[order[k]].lo.x() <= boxes[ti].hi.x(); ++k) {
      const size_t tj = order[k];
      if (Aabb::intersection(boxes[ti], boxes[tj]).empty()) continue;
      const Tri& fi = m.triangles()[ti];
      const Tri& fj = m.triangles()[tj];
      bool shared = false;
      for (int x : fi) shared = shared || std::find(fj.begin(), fj.end(), x) != fj.end();
      if (shared) continue;
      const auto [a, b, c] = m.corners(ti);
      const auto [d, e, f] = m.corners(tj);
      if (segment_crosses_triangle(a, b, d, e, f) || segment_crosses_triangle(b, c, d, e, f) ||
          segment_crosses_triangle(c, a, d, e, f) || segment_crosses_triangle(d, e, a, b, c) ||
          segment_crosses_triangle(e, f, a, b, c) || segment_crosses_triangle(f, d, a, b, c)) {
        ++hits;
      }
    }
  }
  return hits;
}

TEST(BuiltinHandTest, SatisfiesRigInvariants) {
  const HandRig& r = rig();
  EXPECT_EQ(r.parents(), kManoParents);
  EXPECT_EQ(r.rest_joints().size(), 16u);
  EXPECT_GE(r.weights().minCoeff(), 0.0);
  for (Eigen::Index i = 0; i < r.weights().rows(); ++i) EXPECT_NEAR(r.weights().row(i).sum(), 1.0, 1e-6);
  ASSERT_EQ(r.contact_sites().size(), 11u);
  for (const auto& name : kFingerNames) {
    ASSERT_TRUE(r.contact_sites().count(name + "_tip")) << name;
    ASSERT_TRUE(r.contact_sites().count(name + "_middle")) << name;
    EXPECT_GE(r.contact_sites().at(name + "_tip").size(), 4u) << name;
    EXPECT_GE(r.contact_sites().at(name + "_middle").size(), 4u) << name;
  }
  EXPECT_GE(r.contact_sites().at("palm").size(), 10u);
}

TEST(BuiltinHandTest, RestMeshIsClosedAndFreeOfSelfIntersections) {
  const TriMesh m = pose_hand(rig(), HandParams());
  EXPECT_TRUE(m.watertight());
  EXPECT_GT(m.enclosed_volume(), 0.0);
  EXPECT_EQ(count_self_intersections(m), 0u);
}

TEST(BuiltinHandTest, AdultHandScale) {
  const Vec3 ext = rig().rest_mesh().bounds().extent();
  EXPECT_GE(ext.maxCoeff(), 0.15);
  EXPECT_LE(ext.maxCoeff(), 0.22);
}

TEST(BuiltinHandTest, RejectsBrokenRigs) {
  const HandRig& r = rig();
  Eigen::MatrixXd w = r.weights();
  w(0, 0) += 0.5;
  EXPECT_THROW(HandRig(r.rest_mesh(), r.parents(), r.rest_joints(), w, {}, {}, {}), GraspError);
  auto parents = r.parents();
  parents[3] = 5;
  EXPECT_THROW(HandRig(r.rest_mesh(), parents, r.rest_joints(), r.weights(), {}, {}, {}), GraspError);
}

TEST(PoseHandTest, ZeroParamsGiveRestMesh) {
  const TriMesh m = pose_hand(rig(), HandParams());
  EXPECT_LE(max_deviation(m.vertices(), rig().rest_mesh().vertices()), 1e-9);
  EXPECT_EQ(m.triangles(), rig().rest_mesh().triangles());
}

TEST(PoseHandTest, PureTranslation) {
  HandParams p;
  const Vec3 t(0.1, -0.3, 0.7);
  p.global_pose.tail<3>() = t;
  const TriMesh m = pose_hand(rig(), p);
  std::vector<Vec3> expected = rig().rest_mesh().vertices();
  for (Vec3& v : expected) v += t;
  EXPECT_LE(max_deviation(m.vertices(), expected), 1e-9);
}

TEST(PoseHandTest, FlexingOneJointMovesOnlyItsSubtree) {
  const int joint = 3;  // index distal
  HandParams p;
  p.joint_pose.segment<3>(3 * (joint - 1)) = Vec3(0, 0, std::numbers::pi / 2);
  const TriMesh m = pose_hand(rig(), p);
  const auto& rest = rig().rest_mesh().vertices();
  size_t moved = 0;
  for (size_t i = 0; i < rest.size(); ++i) {
    const double d = (m.vertex(i) - rest[i]).norm();
    double w = 0.0;
    for (const auto& [j, wj] : rig().weight_entries(static_cast<int>(i))) {
      if (rig().in_subtree(j, joint)) w += wj;
    }
    if (w == 0.0) {
      EXPECT_LE(d, 1e-9) << "vertex " << i;
    } else if (d > 1e-9) {
      ++moved;
    }
  }
  EXPECT_GT(moved, 0u);
}

TEST(PoseHandTest, RigidEquivariance) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const HandParams p = random_params(rng, 0.4, trial % 2 == 1);
    const RigidTransform g = RigidTransform::from_axis_angle(random_params(rng, 0, false).global_rotation(),
                                                             Vec3(0.3, -0.1, 0.2 * trial));
    const TriMesh a = pose_hand(rig(), compose(g, p, rig()));
    const TriMesh b = pose_hand(rig(), p).transformed(g.rotation(), g.translation());
    EXPECT_LE(max_deviation(a.vertices(), b.vertices()), 1e-9);
  }
}

TEST(ContactPointsTest, ThumbTipAtRest) {
  const auto d = ContactDesignation::from_regions(rig(), {"thumb_tip"});
  const auto pts = contact_points(rig(), HandParams(), d);
  ASSERT_EQ(pts.size(), rig().contact_sites().at("thumb_tip").size());
  for (const PointSample& s : pts) {
    EXPECT_EQ(s.source, SampleSource::kHandContact);
    EXPECT_LE((s.position - rig().rest_mesh().vertex(s.vertex)).norm(), 1e-12);
  }
}

TEST(ContactPointsTest, AllRegionsFormTheUnion) {
  std::vector<std::string> names;
  std::set<int> expected;
  for (const auto& [name, ids] : rig().contact_sites()) {
    names.push_back(name);
    expected.insert(ids.begin(), ids.end());
  }
  const auto d = ContactDesignation::from_regions(rig(), names);
  EXPECT_EQ(d.vertices, std::vector<int>(expected.begin(), expected.end()));
  EXPECT_THROW(ContactDesignation::from_regions(rig(), {"elbow"}), GraspError);
  try {
    contact_points(rig(), HandParams(), ContactDesignation{});
    FAIL() << "expected EmptyContactSet";
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyContactSet);
  }
}

TEST(ContactPointsTest, WristRotationRotatesContacts) {
  const auto d = ContactDesignation::from_regions(rig(), {"index_tip", "palm", "thumb_middle"});
  HandParams p;
  p.global_pose.head<3>() = Vec3(0, std::numbers::pi / 2, 0);
  const Mat3 r = axis_angle_to_matrix(p.global_rotation());
  const Vec3 j0 = rig().rest_joints()[0];
  const auto pts = contact_points(rig(), p, d);
  const TriMesh posed = pose_hand(rig(), p);
  for (const PointSample& s : pts) {
    const Vec3 expected = r * (rig().rest_mesh().vertex(s.vertex) - j0) + j0;
    EXPECT_LE((s.position - expected).norm(), 1e-12);
    EXPECT_EQ(s.position, posed.vertex(s.vertex));
  }
}

TEST(VertexJacobianTest, TranslationColumnsAreIdentity) {
  std::mt19937_64 rng(1);
  const HandParams p = random_params(rng, 0.5, true);
  const std::vector<int> ids = {0, 100, 2000, 4000};
  const Eigen::MatrixXd j = vertex_jacobian(rig(), p, ids);
  for (size_t r = 0; r < ids.size(); ++r) {
    EXPECT_LE((j.block(3 * r, 3, 3, 3) - Eigen::Matrix3d::Identity()).norm(), 1e-15);
  }
}

TEST(VertexJacobianTest, DeadJointColumnsAreZero) {
  const HandKinematics kin(rig(), HandParams());
  for (int i = 0; i < static_cast<int>(rig().num_vertices()); i += 13) {
    const VertexJacobian j = kin.vertex_jacobian(i);
    for (int k = 1; k < kNumJoints; ++k) {
      bool live = false;
      for (const auto& [joint, w] : rig().weight_entries(i)) live = live || rig().in_subtree(joint, k);
      if (!live) EXPECT_EQ((j.block<3, 3>(0, 6 + 3 * (k - 1)).norm()), 0.0);
    }
  }
}

TEST(VertexJacobianTest, MatchesCentralDifferences) {
  std::mt19937_64 rng(42);
  const double h = 1e-6;
  const int nv = static_cast<int>(rig().num_vertices());
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const HandParams p = random_params(rng, 0.6, trial % 3 == 0);
    std::vector<int> ids;
    for (int k = 0; k < 6; ++k) ids.push_back(static_cast<int>(rng() % nv));
    const Eigen::MatrixXd analytic = vertex_jacobian(rig(), p, ids);
    for (int c = 0; c < kNumHandDofs; ++c) {
      HandParams plus = p, minus = p;
      DofVector dp = p.dofs(), dm = p.dofs();
      dp[c] += h;
      dm[c] -= h;
      plus.set_dofs(dp);
      minus.set_dofs(dm);
      const HandKinematics kp(rig(), plus), km(rig(), minus);
      Eigen::VectorXd numeric(3 * ids.size());
      for (size_t r = 0; r < ids.size(); ++r) numeric.segment<3>(3 * r) = (kp.vertex(ids[r]) - km.vertex(ids[r])) / (2 * h);
      const double scale = std::max(numeric.norm(), 1e-6);
      const double err = (numeric - analytic.col(c)).norm() / scale;
      worst = std::max(worst, err);
      EXPECT_LE(err, 1e-3) << "trial " << trial << " column " << c;
    }
  }
  RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(VertexJacobianTest, BarycentricPointJacobian) {
  std::mt19937_64 rng(4);
  const HandParams p = random_params(rng, 0.5, false);
  const HandKinematics kin(rig(), p);
  const Vec3 bary(0.2, 0.3, 0.5);
  const int tri = 77;
  const Tri& t = rig().rest_mesh().triangles()[tri];
  const VertexJacobian expected =
      0.2 * kin.vertex_jacobian(t[0]) + 0.3 * kin.vertex_jacobian(t[1]) + 0.5 * kin.vertex_jacobian(t[2]);
  EXPECT_LE((kin.point_jacobian(tri, bary) - expected).norm(), 1e-14);
}

}  // namespace
}  // namespace grasp
