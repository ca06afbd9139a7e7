#include "grasp/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "grasp/errors.hpp"

namespace grasp {
namespace {

TriMesh oriented_outward(TriMesh mesh) {
  if (mesh.enclosed_volume() >= 0.0) return mesh;
  std::vector<Tri> flipped = mesh.triangles();
  for (Tri& f : flipped) std::swap(f[1], f[2]);
  return TriMesh(mesh.vertices(), std::move(flipped));
}

}  // namespace

TriMesh make_icosphere(double radius, int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& p : v) p.normalize();
  std::vector<Tri> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Tri> next;
    next.reserve(f.size() * 4);
    for (const Tri& t : f) {
      const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (Vec3& p : v) p *= radius;
  return oriented_outward(TriMesh(std::move(v), std::move(f)));
}

double icosphere_chordal_error(double radius, int subdivisions) {
  const TriMesh m = make_icosphere(radius, subdivisions);
  double min_plane = radius;
  for (size_t t = 0; t < m.num_triangles(); ++t) {
    const auto [a, b, c] = m.corners(t);
    min_plane = std::min(min_plane, std::abs(m.face_normal(t).dot(a)));
  }
  return radius - min_plane;
}

TriMesh make_box(const Vec3& size, int divisions) {
  if (divisions < 1) fail(ErrorCode::kInvalidParams, "box divisions must be >= 1");
  const Vec3 h = 0.5 * size;
  std::vector<Vec3> verts;
  std::vector<Tri> tris;
  auto face = [&](const Vec3& center, const Vec3& u, const Vec3& v) {
    const int base = static_cast<int>(verts.size());
    const int n = divisions;
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        const double s = 2.0 * i / n - 1.0, t = 2.0 * j / n - 1.0;
        verts.push_back(center + s * u + t * v);
      }
    }
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const int a = base + j * (n + 1) + i, b = a + 1, c = a + n + 2, d = a + n + 1;
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      }
    }
  };
  const Vec3 x = Vec3::UnitX(), y = Vec3::UnitY(), z = Vec3::UnitZ();
  // u x v points outward for each face.
  face(h.x() * x, h.y() * y, h.z() * z);
  face(-h.x() * x, h.z() * z, h.y() * y);
  face(h.y() * y, h.z() * z, h.x() * x);
  face(-h.y() * y, h.x() * x, h.z() * z);
  face(h.z() * z, h.x() * x, h.y() * y);
  face(-h.z() * z, h.y() * y, h.x() * x);
  const double tol = 1e-9 * std::max(size.maxCoeff(), 1e-9);
  return oriented_outward(TriMesh::welded(verts, tris, tol));
}

TriMesh make_lathe(const std::vector<Vec2>& profile, int segments) {
  if (profile.size() < 3 || segments < 3) fail(ErrorCode::kInvalidParams, "lathe needs >= 3 profile points and segments");
  const int np = static_cast<int>(profile.size());
  std::vector<Vec3> verts;
  std::vector<Tri> tris;
  for (const Vec2& p : profile) {
    for (int j = 0; j < segments; ++j) {
      const double a = 2.0 * std::numbers::pi * j / segments;
      verts.emplace_back(p.x() * std::cos(a), p.x() * std::sin(a), p.y());
    }
  }
  for (int i = 0; i < np; ++i) {
    const int i2 = (i + 1) % np;
    for (int j = 0; j < segments; ++j) {
      const int j2 = (j + 1) % segments;
      const int a = i * segments + j, b = i * segments + j2, c = i2 * segments + j2,
                d = i2 * segments + j;
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }
  }
  double extent = 0.0;
  for (const Vec2& p : profile) extent = std::max(extent, p.cwiseAbs().maxCoeff());
  return oriented_outward(TriMesh::welded(verts, tris, 1e-9 * std::max(extent, 1e-9)));
}

TriMesh make_cylinder(double radius, double height, int segments, int stacks) {
  std::vector<Vec2> profile;
  const double h = 0.5 * height;
  profile.emplace_back(0.0, -h);
  profile.emplace_back(radius, -h);
  for (int s = 1; s < stacks; ++s) profile.emplace_back(radius, -h + height * s / stacks);
  profile.emplace_back(radius, h);
  profile.emplace_back(0.0, h);
  return make_lathe(profile, segments);
}

TriMesh make_lathe_mug(double outer_radius, double height, double wall, int segments) {
  const double r = outer_radius, w = wall, h = height;
  // Cross-section of the solid (walls plus bottom), counter-clockwise.
  std::vector<Vec2> profile = {{0.0, 0.0}, {r, 0.0}, {r, h}, {r - w, h}, {r - w, w}, {0.0, w}};
  const TriMesh m = make_lathe(profile, segments);
  return m.translated(Vec3(0, 0, -0.5 * h));
}

TriMesh make_quad(double hx, double hy, double z) {
  return TriMesh({{-hx, -hy, z}, {hx, -hy, z}, {hx, hy, z}, {-hx, hy, z}}, {{0, 1, 2}, {0, 2, 3}});
}

}  // namespace grasp
