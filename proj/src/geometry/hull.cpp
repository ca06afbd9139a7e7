#include "grasp/hull.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "grasp/errors.hpp"

namespace grasp {
namespace {

struct Face {
  Tri v;
  Vec3 normal;  // unit
  double offset;
  bool alive = true;
};

uint64_t directed(int a, int b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

}  // namespace

ConvexHull convex_hull(std::span<const Vec3> points) {
  const int n = static_cast<int>(points.size());
  if (n < 4) fail(ErrorCode::kDegenerateHull, "need at least 4 points");

  Aabb box;
  for (const Vec3& p : points) box.extend(p);
  const double scale = std::max(box.extent().norm(), 1e-300);
  const double eps = 1e-12 * scale;

  // Initial simplex from extreme points.
  int i0 = 0;
  for (int i = 1; i < n; ++i) {
    if (points[i].x() < points[i0].x()) i0 = i;
  }
  int i1 = -1;
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = (points[i] - points[i0]).squaredNorm();
    if (d > best) { best = d; i1 = i; }
  }
  if (i1 < 0 || std::sqrt(best) <= eps) fail(ErrorCode::kDegenerateHull, "all points coincide");
  const Vec3 axis = (points[i1] - points[i0]).normalized();
  int i2 = -1;
  best = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3 d = points[i] - points[i0];
    const double off = (d - d.dot(axis) * axis).norm();
    if (off > best) { best = off; i2 = i; }
  }
  if (i2 < 0 || best <= eps) fail(ErrorCode::kDegenerateHull, "points are collinear");
  const Vec3 plane_n = (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized();
  int i3 = -1;
  best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double off = std::abs(plane_n.dot(points[i] - points[i0]));
    if (off > best) { best = off; i3 = i; }
  }
  if (i3 < 0 || best <= eps * 10.0) fail(ErrorCode::kDegenerateHull, "points are coplanar");

  const Vec3 interior = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;
  std::vector<Face> faces;
  std::unordered_map<uint64_t, int> edge_face;

  auto add_face = [&](int a, int b, int c) {
    Vec3 nrm = (points[b] - points[a]).cross(points[c] - points[a]);
    if (nrm.dot(points[a] - interior) < 0.0) {
      std::swap(b, c);
      nrm = -nrm;
    }
    Face f;
    f.v = {a, b, c};
    f.normal = nrm.normalized();
    f.offset = f.normal.dot(points[a]);
    const int id = static_cast<int>(faces.size());
    faces.push_back(f);
    for (int k = 0; k < 3; ++k) edge_face[directed(f.v[k], f.v[(k + 1) % 3])] = id;
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);

  std::vector<int> visible;
  std::vector<std::pair<int, int>> horizon;
  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    const Vec3& q = points[p];
    visible.clear();
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      if (faces[f].alive && faces[f].normal.dot(q) - faces[f].offset > eps) visible.push_back(f);
    }
    if (visible.empty()) continue;
    for (int f : visible) faces[f].alive = false;
    horizon.clear();
    for (int f : visible) {
      for (int k = 0; k < 3; ++k) {
        const int a = faces[f].v[k], b = faces[f].v[(k + 1) % 3];
        const auto it = edge_face.find(directed(b, a));
        if (it != edge_face.end() && faces[it->second].alive) horizon.emplace_back(a, b);
      }
    }
    for (int f : visible) {
      for (int k = 0; k < 3; ++k) edge_face.erase(directed(faces[f].v[k], faces[f].v[(k + 1) % 3]));
    }
    for (const auto& [a, b] : horizon) {
      // Orientation follows the removed face, so no interior test is needed.
      Face f;
      f.v = {a, b, p};
      const Vec3 nrm = (points[b] - points[a]).cross(q - points[a]);
      f.normal = nrm.normalized();
      f.offset = f.normal.dot(points[a]);
      const int id = static_cast<int>(faces.size());
      faces.push_back(f);
      for (int k = 0; k < 3; ++k) edge_face[directed(f.v[k], f.v[(k + 1) % 3])] = id;
    }
  }

  ConvexHull hull;
  for (const Face& f : faces) {
    if (!f.alive) continue;
    hull.faces.push_back(f.v);
    const Vec3 a = points[f.v[0]] - interior, b = points[f.v[1]] - interior,
               c = points[f.v[2]] - interior;
    hull.volume += a.dot(b.cross(c)) / 6.0;
  }
  if (!(hull.volume > 0.0)) fail(ErrorCode::kDegenerateHull, "hull has no volume");
  return hull;
}

double convex_hull_volume(std::span<const Vec3> points) { return convex_hull(points).volume; }

}  // namespace grasp
