#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "grasp/errors.hpp"
#include "grasp/metrics.hpp"
#include "grasp/primitives.hpp"

namespace grasp {
namespace {

TriMesh flipped(const TriMesh& m) {
  std::vector<Tri> tris = m.triangles();
  for (Tri& t : tris) std::swap(t[1], t[2]);
  return TriMesh(m.vertices(), tris);
}

// Closed shell with a cubic cavity of half-size `inner`.
TriMesh cage(double inner, double outer) {
  const std::vector<TriMesh> parts = {make_box(Vec3::Constant(2 * outer), 2),
                                      flipped(make_box(Vec3::Constant(2 * inner), 2))};
  return TriMesh::merged(parts);
}

TEST(FscoreTest, Identity) {
  const TriMesh m = make_icosphere(0.05, 3);
  EXPECT_NEAR(fscore(m, m, 5.0), 1.0, 1e-3);
  EXPECT_NEAR(fscore(m, m, 10.0), 1.0, 1e-3);
}

TEST(FscoreTest, FarDisplacementScoresZero) {
  const TriMesh gt = make_quad(0.5, 0.5, 0.0);
  const TriMesh pred = gt.translated(Vec3(0, 0, 0.02));
  EXPECT_EQ(fscore(pred, gt, 5.0), 0.0);
}

TEST(FscoreTest, PlanarOffsetMatchesAnalyticFraction) {
  // Offset 4 mm along the normal and 100 mm sideways: samples over the other
  // square are 4 mm away, the rest are within 5 mm only for 3 mm past its edge.
  const TriMesh gt = make_quad(0.5, 0.5, 0.0);
  const TriMesh pred = gt.translated(Vec3(0.1, 0, 0.004));
  const double expected = 0.9 + 0.003;
  EXPECT_NEAR(fscore(pred, gt, 5.0), expected, 0.01);
}

TEST(Chamfer3dTest, IdentityParallelPlanesAndSymmetry) {
  const TriMesh a = make_box(Vec3(1, 1, 1), 4);
  EXPECT_LT(chamfer_3d(a, a), 0.1);
  const TriMesh p = make_quad(0.5, 0.5, 0.0);
  EXPECT_NEAR(chamfer_3d(p, p.translated(Vec3(0, 0, 0.01))), 10.0, 0.1);
  const TriMesh s = make_icosphere(0.4, 3).translated(Vec3(0.05, 0, 0));
  EXPECT_EQ(chamfer_3d(a, s), chamfer_3d(s, a));
}

TEST(Chamfer3dTest, StableAcrossSeeds) {
  const TriMesh a = make_icosphere(0.05, 4);
  const TriMesh b = make_icosphere(0.058, 4).translated(Vec3(0.003, 0, 0));
  std::vector<double> cd, f;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    cd.push_back(chamfer_3d(a, b, 10000, seed));
    f.push_back(fscore(a, b, 10.0, 10000, seed));
  }
  const auto [cmin, cmax] = std::minmax_element(cd.begin(), cd.end());
  const auto [fmin, fmax] = std::minmax_element(f.begin(), f.end());
  EXPECT_LT((*cmax - *cmin) / *cmin, 0.01);
  EXPECT_LT((*fmax - *fmin) / *fmin, 0.01);
}

TEST(SivTest, DisjointCornerAndSelfOverlap) {
  const TriMesh cube = make_box(Vec3(1, 1, 1));
  EXPECT_EQ(solid_intersection_volume(cube, cube.translated(Vec3(2, 0, 0))), 0.0);
  const TriMesh moved = cube.translated(Vec3(0.9, 0.9, 0.9));
  EXPECT_NEAR(solid_intersection_volume(cube, moved), 1000.0, 20.0);
  EXPECT_EQ(solid_intersection_volume(cube, moved), solid_intersection_volume(moved, cube));
  const TriMesh ball = make_icosphere(0.05, 4);
  const double own = ball.enclosed_volume() * 1e6;
  EXPECT_NEAR(solid_intersection_volume(ball, ball), own, 0.02 * own);
  EXPECT_THROW(solid_intersection_volume(make_quad(1, 1, 0), cube), GraspError);
}

TEST(ContactRatioTest, Examples) {
  const MeshSdf sdf(make_box(Vec3(1, 1, 1), 2));
  const std::vector<Vec3> on = {Vec3(0.5, 0, 0), Vec3(0, -0.5, 0.2)};
  EXPECT_EQ(contact_ratio(on, sdf), 1.0);
  const std::vector<Vec3> far = {Vec3(0.55, 0, 0), Vec3(0, -0.55, 0.2)};
  EXPECT_EQ(contact_ratio(far, sdf), 0.0);
  std::vector<Vec3> mixed(12, Vec3(0.6, 0, 0));
  mixed[0] = Vec3(0.503, 0, 0);
  mixed[5] = Vec3(0, 0.498, 0);
  mixed[9] = Vec3(0, 0, -0.5);
  EXPECT_EQ(contact_ratio(mixed, sdf), 0.25);
  EXPECT_THROW(contact_ratio(std::vector<Vec3>{}, sdf), GraspError);
}

TEST(IpiTest, ExamplesAndMonotonicity) {
  EXPECT_EQ(ipi(0.0, 0.3), 0.0);
  EXPECT_EQ(ipi(0.42, 0.0), 0.42);
  EXPECT_NEAR(ipi(0.176, 0.0092), 0.176 / std::exp(0.0092), 1e-15);
  EXPECT_NEAR(ipi(0.051, 0.0001), 0.051, 1e-5);
  for (int k = 0; k < 10; ++k) {
    const double cr = 0.1 * k;
    EXPECT_LT(ipi(cr, 0.5), ipi(cr + 0.1, 0.5));
    EXPECT_GT(ipi(cr + 0.1, 0.2), ipi(cr + 0.1, 0.3));
  }
  EXPECT_THROW(ipi(1.5, 0.0), GraspError);
}

TEST(SimulationTest, FreeFallReachesHalfGTSquared) {
  const TriMesh hand = make_box(Vec3(0.1, 0.1, 0.1)).translated(Vec3(5, 0, 0));
  const TriMesh object = make_icosphere(0.03, 3);
  const double sd = simulation_displacement(hand, object);
  EXPECT_NEAR(sd, 50.0 * 9.81, 1.0);
  SimulationConfig capped;
  capped.escape_cm = 100.0;
  EXPECT_EQ(simulation_displacement(hand, object, capped), 100.0);
}

TEST(SimulationTest, ZeroGravityStaysPut) {
  SimulationConfig cfg;
  cfg.gravity = Vec3::Zero();
  EXPECT_NEAR(simulation_displacement(cage(0.045, 0.06), make_icosphere(0.04, 3), cfg), 0.0, 1e-6);
}

TEST(SimulationTest, CageHoldsTheObject) {
  const TriMesh hand = cage(0.042, 0.06);
  const TriMesh object = make_icosphere(0.04, 3);
  const double sd = simulation_displacement(hand, object);
  EXPECT_LT(sd, 0.5);
  EXPECT_EQ(simulation_displacement(hand, object), sd);
}

TEST(MetricReportTest, JsonIsFlat) {
  MetricReport r;
  r.f5 = 0.5;
  r.sd = 2.25;
  const nlohmann::json j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j.size(), 8u);
  EXPECT_EQ(j.at("f5").get<double>(), 0.5);
  EXPECT_EQ(j.at("sd").get<double>(), 2.25);
}

}  // namespace
}  // namespace grasp
