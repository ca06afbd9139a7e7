#include "grasp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "grasp/errors.hpp"

namespace grasp {
namespace {

constexpr double kMinTriangleArea = 1e-12;

uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

}  // namespace

bool edges_closed(const std::vector<Tri>& triangles) {
  if (triangles.empty()) return false;
  std::unordered_map<uint64_t, int> count;
  count.reserve(triangles.size() * 2);
  for (const Tri& f : triangles) {
    for (int k = 0; k < 3; ++k) ++count[edge_key(f[k], f[(k + 1) % 3])];
  }
  return std::all_of(count.begin(), count.end(), [](const auto& kv) { return kv.second == 2; });
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Tri> triangles)
    : vertices_(std::move(vertices)) {
  const int n = static_cast<int>(vertices_.size());
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) fail(ErrorCode::kInvalidMesh, "non-finite vertex coordinate");
  }
  triangles_.reserve(triangles.size());
  for (const Tri& f : triangles) {
    for (int idx : f) {
      if (idx < 0 || idx >= n) fail(ErrorCode::kInvalidMesh, "triangle index out of range");
    }
    const Vec3& a = vertices_[f[0]];
    const Vec3& b = vertices_[f[1]];
    const Vec3& c = vertices_[f[2]];
    if (0.5 * (b - a).cross(c - a).norm() <= kMinTriangleArea) continue;
    triangles_.push_back(f);
  }
  watertight_ = edges_closed(triangles_);
}

double TriMesh::triangle_area(size_t t) const {
  const auto [a, b, c] = corners(t);
  return 0.5 * (b - a).cross(c - a).norm();
}

Vec3 TriMesh::face_normal(size_t t) const {
  const auto [a, b, c] = corners(t);
  return (b - a).cross(c - a).normalized();
}

Aabb TriMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices_) box.extend(v);
  return box;
}

double TriMesh::surface_area() const {
  double area = 0.0;
  for (size_t t = 0; t < triangles_.size(); ++t) area += triangle_area(t);
  return area;
}

Vec3 TriMesh::centroid() const {
  Vec3 acc = Vec3::Zero();
  double area = 0.0;
  for (size_t t = 0; t < triangles_.size(); ++t) {
    const auto [a, b, c] = corners(t);
    const double w = 0.5 * (b - a).cross(c - a).norm();
    acc += w * (a + b + c) / 3.0;
    area += w;
  }
  if (area <= 0.0) fail(ErrorCode::kInvalidMesh, "centroid of empty mesh");
  return acc / area;
}

double TriMesh::enclosed_volume() const {
  double vol = 0.0;
  for (size_t t = 0; t < triangles_.size(); ++t) {
    const auto [a, b, c] = corners(t);
    vol += a.dot(b.cross(c));
  }
  return vol / 6.0;
}

TriMesh TriMesh::with_vertices(std::vector<Vec3> vertices) const {
  TriMesh out;
  out.vertices_ = std::move(vertices);
  out.triangles_ = triangles_;
  out.watertight_ = watertight_;
  return out;
}

TriMesh TriMesh::transformed(const Mat3& linear, const Vec3& offset) const {
  std::vector<Vec3> v(vertices_.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = linear * vertices_[i] + offset;
  return with_vertices(std::move(v));
}

TriMesh TriMesh::scaled_about(const Vec3& center, double s) const {
  std::vector<Vec3> v(vertices_.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = center + s * (vertices_[i] - center);
  return with_vertices(std::move(v));
}

TriMesh TriMesh::welded(const std::vector<Vec3>& vertices, const std::vector<Tri>& triangles,
                        double tol) {
  std::map<std::array<int64_t, 3>, int> cells;
  std::vector<int> remap(vertices.size());
  std::vector<Vec3> out;
  for (size_t i = 0; i < vertices.size(); ++i) {
    const Vec3& v = vertices[i];
    const std::array<int64_t, 3> key = {std::llround(v.x() / tol), std::llround(v.y() / tol),
                                        std::llround(v.z() / tol)};
    auto [it, inserted] = cells.emplace(key, static_cast<int>(out.size()));
    if (inserted) out.push_back(v);
    remap[i] = it->second;
  }
  std::vector<Tri> tris;
  tris.reserve(triangles.size());
  for (const Tri& f : triangles) {
    const Tri g = {remap[f[0]], remap[f[1]], remap[f[2]]};
    if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) continue;
    tris.push_back(g);
  }
  return TriMesh(std::move(out), std::move(tris));
}

TriMesh TriMesh::merged(std::span<const TriMesh> parts) {
  std::vector<Vec3> v;
  std::vector<Tri> t;
  bool closed = true;
  for (const TriMesh& m : parts) {
    const int base = static_cast<int>(v.size());
    v.insert(v.end(), m.vertices_.begin(), m.vertices_.end());
    for (const Tri& f : m.triangles_) t.push_back({f[0] + base, f[1] + base, f[2] + base});
    closed = closed && m.watertight_;
  }
  TriMesh out;
  out.vertices_ = std::move(v);
  out.triangles_ = std::move(t);
  out.watertight_ = closed && !out.triangles_.empty();
  return out;
}

}  // namespace grasp
