#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "grasp/bvh.hpp"
#include "grasp/errors.hpp"
#include "grasp/hull.hpp"
#include "grasp/primitives.hpp"
#include "grasp/sampling.hpp"
#include "grasp/sdf.hpp"
#include "grasp/voxel.hpp"

namespace grasp {
namespace {

Vec3 random_in_box(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

// Brute-force nearest surface point over every triangle.
double brute_force_distance(const TriMesh& mesh, const Vec3& q) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto [a, b, c] = mesh.corners(t);
    best = std::min(best, (closest_point_on_triangle(q, a, b, c).point - q).norm());
  }
  return best;
}

TriMesh lathe_sphere(double r, int rings, int segments) {
  std::vector<Vec2> profile;
  for (int i = 0; i <= rings; ++i) {
    const double a = -std::numbers::pi / 2 + std::numbers::pi * i / rings;
    profile.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  // Close along the axis.
  profile.front().x() = 0.0;
  profile.back().x() = 0.0;
  return make_lathe(profile, segments);
}

TEST(TriMeshTest, DropsDegenerateTrianglesAndFlagsClosedness) {
  const TriMesh cube = make_box(Vec3::Ones());
  EXPECT_TRUE(cube.watertight());
  EXPECT_NEAR(cube.enclosed_volume(), 1.0, 1e-12);

  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}};
  const TriMesh m(v, {{0, 1, 2}, {0, 1, 3}});
  EXPECT_EQ(m.num_triangles(), 1u);
  EXPECT_FALSE(m.watertight());
  EXPECT_THROW(TriMesh(v, {{0, 1, 7}}), GraspError);
}

TEST(AccelIndexTest, SingleTriangleHasOneLeaf) {
  const TriMesh tri({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  const AccelIndex index = build_bvh(tri);
  EXPECT_EQ(index.num_leaves(), 1u);
  EXPECT_EQ(index.num_nodes(), 1u);
}

TEST(AccelIndexTest, EmptyMeshIsInvalid) {
  try {
    build_bvh(TriMesh());
    FAIL() << "expected InvalidMesh";
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidMesh);
  }
}

TEST(AccelIndexTest, NearestMatchesExhaustiveScanOnDenseSphere) {
  const TriMesh sphere = lathe_sphere(1.0, 50, 100);
  ASSERT_GE(sphere.num_triangles(), 9000u);
  ASSERT_TRUE(sphere.watertight());
  const AccelIndex index = build_bvh(sphere);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Vec3 q = random_in_box(rng, -2.0, 2.0);
    EXPECT_NEAR(std::sqrt(index.nearest(q).squared_distance), brute_force_distance(sphere, q), 1e-12);
  }
}

TEST(SignedDistanceTest, SphereOracle) {
  const int subdiv = 4;
  const TriMesh sphere = make_icosphere(1.0, subdiv);
  const AccelIndex index = build_bvh(sphere);
  const double chordal = icosphere_chordal_error(1.0, subdiv);
  const SdfResult r = signed_distance(sphere, index, Vec3(0, 0, 2));
  EXPECT_NEAR(r.value, 1.0, chordal + 1e-6);
  EXPECT_NEAR(r.gradient.norm(), 1.0, 1e-9);
  // Random interior/exterior points against |q| - 1.
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 q = random_in_box(rng, -1.8, 1.8);
    const double v = signed_distance(sphere, index, q).value;
    EXPECT_NEAR(v, q.norm() - 1.0, chordal + 1e-6);
  }
}

TEST(SignedDistanceTest, QueryOnVertexIsZero) {
  const TriMesh sphere = make_icosphere(1.0, 3);
  const AccelIndex index = build_bvh(sphere);
  const SdfResult r = signed_distance(sphere, index, sphere.vertex(17));
  EXPECT_NEAR(r.value, 0.0, 1e-9);
  EXPECT_NEAR(r.gradient.norm(), 1.0, 1e-9);
  EXPECT_GT(r.gradient.dot(sphere.vertex(17)), 0.9);
}

TEST(SignedDistanceTest, CubeCenterOracle) {
  const TriMesh cube = make_box(Vec3::Ones(), 3);
  const AccelIndex index = build_bvh(cube);
  EXPECT_NEAR(signed_distance(cube, index, Vec3::Zero()).value, -0.5, 1e-9);
  // Analytic box SDF away from the medial axis.
  auto box_sdf = [](const Vec3& p) {
    const Vec3 d = p.cwiseAbs() - Vec3::Constant(0.5);
    return d.cwiseMax(0.0).norm() + std::min(d.maxCoeff(), 0.0);
  };
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Vec3 q = random_in_box(rng, -1.0, 1.0);
    EXPECT_NEAR(signed_distance(cube, index, q).value, box_sdf(q), 1e-9);
  }
}

TEST(SignedDistanceTest, OpenMeshRejectsSignedQueries) {
  const TriMesh quad = make_quad(1, 1, 0);
  const AccelIndex index = build_bvh(quad);
  try {
    signed_distance(quad, index, Vec3(0, 0, 1));
    FAIL();
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSignRequiresWatertight);
  }
  EXPECT_NEAR(unsigned_distance(index, Vec3(0, 0, 1)).value, 1.0, 1e-12);
}

// Along random rays the sign must match the parity of remaining surface
// crossings. The mug is non-convex, so rays cross it several times.
TEST(SignedDistanceProperty, SignMatchesRayParity) {
  const TriMesh mug = make_lathe_mug(0.05, 0.1, 0.008, 48);
  ASSERT_TRUE(mug.watertight());
  const AccelIndex index = build_bvh(mug);
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int ray = 0; ray < 1000; ++ray) {
    const Vec3 origin = random_in_box(rng, -0.12, 0.12);
    const Vec3 dir = random_unit(rng);
    const std::vector<RayHit> hits = index.ray_hits(origin, dir);
    std::vector<double> probes = {0.0};
    for (size_t k = 0; k < hits.size(); ++k) {
      const double next = k + 1 < hits.size() ? hits[k + 1].t : hits[k].t + 0.05;
      probes.push_back(0.5 * (hits[k].t + next));
    }
    for (size_t k = 0; k < probes.size(); ++k) {
      const size_t remaining = hits.size() - k;
      const Vec3 p = origin + probes[k] * dir;
      const bool parity_inside = remaining % 2 == 1;
      const double v = signed_distance(mug, index, p).value;
      if (std::abs(v) < 1e-7) continue;
      EXPECT_EQ(v < 0.0, parity_inside) << "ray " << ray << " probe " << k;
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(SignedDistanceProperty, GradientMatchesFiniteDifferences) {
  const TriMesh sphere = make_icosphere(1.0, 3);
  const AccelIndex index = build_bvh(sphere);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> radius(0.55, 1.8);
  const double h = 1e-5;
  int tested = 0;
  while (tested < 500) {
    const Vec3 q = radius(rng) * random_unit(rng);
    const SdfResult r = signed_distance(sphere, index, q);
    if (std::abs(r.value) < 0.02) continue;  // stay off the surface
    Vec3 fd;
    for (int k = 0; k < 3; ++k) {
      Vec3 e = Vec3::Zero();
      e[k] = h;
      fd[k] = (signed_distance(sphere, index, q + e).value - signed_distance(sphere, index, q - e).value) /
              (2 * h);
    }
    EXPECT_LE((fd - r.gradient).norm() / fd.norm(), 1e-3) << q.transpose();
    EXPECT_NEAR(r.gradient.norm(), 1.0, 1e-6);
    ++tested;
  }
}

TEST(SignedDistanceTest, FastWindingNumberAgreesWithExact) {
  const TriMesh mug = make_lathe_mug(0.05, 0.1, 0.008, 32);
  const AccelIndex index = build_bvh(mug);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const Vec3 q = random_in_box(rng, -0.1, 0.1);
    EXPECT_NEAR(index.winding_number(q), index.winding_number_exact(q), 0.05);
  }
}

TEST(FarthestPointSampleTest, SingletonIsOnSurface) {
  const TriMesh sphere = make_icosphere(1.0, 3);
  const auto s = farthest_point_sample(sphere, 1, 42);
  ASSERT_EQ(s.size(), 1u);
  const AccelIndex index = build_bvh(sphere);
  EXPECT_LE(std::abs(signed_distance(sphere, index, s[0].position).value), 1e-9);
}

TEST(FarthestPointSampleTest, DeterministicPerSeed) {
  const TriMesh sphere = make_icosphere(1.0, 3);
  const auto a = farthest_point_sample(sphere, 64, 5);
  const auto b = farthest_point_sample(sphere, 64, 5);
  const auto c = farthest_point_sample(sphere, 64, 6);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].position, b[i].position);
  bool any_different = false;
  for (size_t i = 0; i < a.size(); ++i) any_different |= a[i].position != c[i].position;
  EXPECT_TRUE(any_different);
}

TEST(FarthestPointSampleTest, BudgetExceeded) {
  const TriMesh sphere = make_icosphere(1.0, 1);
  try {
    farthest_point_sample(sphere, 100, 1, SampleSource::kObjectSurface, 50);
    FAIL();
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSampleBudgetExceeded);
  }
}

// Packing oracle: n disks of radius rho cover the sphere area when
// n * pi * rho^2 = 4 pi r^2, and a well-spread set has nearest-neighbour
// spacing of about 2 rho. The FPS minimum pairwise distance must be at least
// 75% of rho = 2 sqrt(4 pi r^2 / (n pi)) * 0.5.
TEST(FarthestPointSampleTest, PackingBoundOnSphere) {
  const double r = 1.0;
  const size_t n = 1000;
  const TriMesh sphere = make_icosphere(r, 5);
  const auto s = farthest_point_sample(sphere, n, 3);
  double min_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) min_d = std::min(min_d, (s[i].position - s[j].position).norm());
  }
  const double estimate = 2.0 * std::sqrt(4.0 * std::numbers::pi * r * r / (n * std::numbers::pi)) * 0.5;
  EXPECT_GE(min_d, 0.75 * estimate);
  EXPECT_LE(min_d, 2.0 * estimate + 0.25 * estimate);
}

TEST(FarthestPointSampleProperty, SamplesLieOnSurface) {
  const TriMesh mug = make_lathe_mug(0.05, 0.1, 0.008, 32);
  const AccelIndex index = build_bvh(mug);
  for (const PointSample& p : farthest_point_sample(mug, 200, 17)) {
    EXPECT_LE(std::abs(signed_distance(mug, index, p.position).value), 1e-6);
    EXPECT_NEAR(p.barycentric.sum(), 1.0, 1e-9);
    EXPECT_GE(p.barycentric.minCoeff(), 0.0);
  }
}

// Independent hull oracle: every triple whose plane has all points on one
// side is a facet. Valid for points in general position.
double brute_force_hull_volume(const std::vector<Vec3>& p) {
  const size_t n = p.size();
  Vec3 inner = Vec3::Zero();
  for (const Vec3& x : p) inner += x;
  inner /= static_cast<double>(n);
  double vol = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      for (size_t k = j + 1; k < n; ++k) {
        const Vec3 nrm = (p[j] - p[i]).cross(p[k] - p[i]);
        int pos = 0, neg = 0;
        for (size_t m = 0; m < n; ++m) {
          if (m == i || m == j || m == k) continue;
          const double s = nrm.dot(p[m] - p[i]);
          (s > 0 ? pos : neg)++;
        }
        if (pos == 0 || neg == 0) vol += std::abs(nrm.dot(p[i] - inner)) / 6.0;
      }
    }
  }
  return vol;
}

std::vector<Vec3> cube_corners() {
  std::vector<Vec3> c;
  for (int i = 0; i < 8; ++i) c.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  return c;
}

TEST(ConvexHullTest, UnitCube) {
  EXPECT_NEAR(convex_hull_volume(cube_corners()), 1.0, 1e-9);
}

TEST(ConvexHullTest, InteriorPointsDoNotChangeVolume) {
  std::vector<Vec3> pts = cube_corners();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) pts.push_back(random_in_box(rng, 0.01, 0.99));
  std::shuffle(pts.begin(), pts.end(), rng);
  EXPECT_NEAR(convex_hull_volume(pts), 1.0, 1e-9);
}

TEST(ConvexHullTest, MatchesBruteForceFacetEnumeration) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(random_in_box(rng, -1.0, 1.0));
    EXPECT_NEAR(convex_hull_volume(pts), brute_force_hull_volume(pts), 1e-9);
  }
}

TEST(ConvexHullTest, CoplanarInputIsDegenerate) {
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0.5, 0.2, 0}};
  try {
    convex_hull_volume(pts);
    FAIL();
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateHull);
  }
}

TEST(ConvexHullProperty, RigidInvarianceAndCubicScaling) {
  std::mt19937_64 rng(31);
  std::vector<Vec3> pts;
  for (int i = 0; i < 300; ++i) pts.push_back(random_in_box(rng, -1.0, 1.0));
  const double v0 = convex_hull_volume(pts);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat3 rot = Eigen::AngleAxisd(1.0 + trial, random_unit(rng)).toRotationMatrix();
    const Vec3 t = random_in_box(rng, -5, 5);
    const double s = 0.5 + 0.5 * trial;
    std::vector<Vec3> moved, scaled;
    for (const Vec3& p : pts) {
      moved.push_back(rot * p + t);
      scaled.push_back(s * p);
    }
    EXPECT_NEAR(convex_hull_volume(moved) / v0, 1.0, 1e-9);
    EXPECT_NEAR(convex_hull_volume(scaled) / (s * s * s * v0), 1.0, 1e-9);
  }
}

TEST(VoxelizeTest, UnitCube) {
  const OccupancyGrid g = voxelize_occupancy(make_box(Vec3::Ones(), 2), 0.05);
  EXPECT_NEAR(g.volume(), 1.0, 0.05);
}

TEST(VoxelizeTest, TinyMeshOccupiesAtMostOneVoxel) {
  const OccupancyGrid g = voxelize_occupancy(make_icosphere(0.001, 1), 0.01);
  EXPECT_LE(g.count(), 1u);
}

TEST(VoxelizeTest, SphereVolume) {
  const double r = 0.1;
  const OccupancyGrid g = voxelize_occupancy(make_icosphere(r, 5), 0.005);
  const double analytic = 4.0 / 3.0 * std::numbers::pi * r * r * r;
  EXPECT_NEAR(g.volume() / analytic, 1.0, 0.03);
}

TEST(VoxelizeTest, BudgetAndOpenMeshErrors) {
  try {
    voxelize_occupancy(make_box(Vec3::Ones()), 0.001, 1000);
    FAIL();
  } catch (const GraspError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGridTooLarge);
  }
  EXPECT_THROW(voxelize_occupancy(make_quad(1, 1, 0), 0.1), GraspError);
}

TEST(VoxelizeTest, AgreesWithWindingNumberOnNonConvexMesh) {
  const TriMesh mug = make_lathe_mug(0.05, 0.1, 0.01, 40);
  const AccelIndex index = build_bvh(mug);
  const OccupancyGrid g = voxelize_occupancy(mug, 0.004);
  int mismatches = 0;
  for (int k = 0; k < g.spec.dims[2]; ++k) {
    for (int j = 0; j < g.spec.dims[1]; ++j) {
      for (int i = 0; i < g.spec.dims[0]; ++i) {
        const Vec3 c = g.spec.center(i, j, k);
        if (index.nearest(c).squared_distance < 1e-18) continue;  // on the surface
        const bool inside = index.winding_number_exact(c) >= 0.5;
        mismatches += inside != (g.occupied[g.index(i, j, k)] == 1);
      }
    }
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(VoxelizeProperty, ConvergesMonotonicallyOnSphere) {
  const double r = 0.1;
  const double analytic = 4.0 / 3.0 * std::numbers::pi * r * r * r;
  const TriMesh sphere = make_icosphere(r, 6);
  double prev_err = std::numeric_limits<double>::infinity();
  for (double vs : {0.02, 0.01, 0.005, 0.0025}) {
    const double err = std::abs(voxelize_occupancy(sphere, vs).volume() - analytic);
    EXPECT_LT(err, prev_err) << "voxel " << vs;
    prev_err = err;
  }
}

}  // namespace
}  // namespace grasp
