#ifndef GRASP_MESH_HPP
#define GRASP_MESH_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace grasp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Tri = std::array<int, 3>;

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& o) {
    lo = lo.cwiseMin(o.lo);
    hi = hi.cwiseMax(o.hi);
  }
  bool empty() const { return (hi.array() < lo.array()).any(); }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.squaredNorm();
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  static Aabb intersection(const Aabb& a, const Aabb& b) {
    Aabb r;
    r.lo = a.lo.cwiseMax(b.lo);
    r.hi = a.hi.cwiseMin(b.hi);
    return r;
  }
};

// Indexed triangle surface in meters.
//
// Construction validates indices, drops triangles with area <= 1e-12 m^2 and
// records whether the surface is closed (every undirected edge shared by
// exactly two triangles). Vertices are never reordered, so vertex ids stay
// stable for skinned meshes.
class TriMesh {
 public:
  TriMesh() = default;
  TriMesh(std::vector<Vec3> vertices, std::vector<Tri> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Tri>& triangles() const { return triangles_; }
  const Vec3& vertex(int i) const { return vertices_[static_cast<size_t>(i)]; }
  size_t num_vertices() const { return vertices_.size(); }
  size_t num_triangles() const { return triangles_.size(); }
  bool empty() const { return triangles_.empty(); }
  bool watertight() const { return watertight_; }

  std::array<Vec3, 3> corners(size_t t) const {
    const Tri& f = triangles_[t];
    return {vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]};
  }
  double triangle_area(size_t t) const;
  Vec3 face_normal(size_t t) const;  // unit, right-handed winding

  Aabb bounds() const;
  double surface_area() const;
  // Area-weighted centroid of the surface.
  Vec3 centroid() const;
  // Signed enclosed volume by the divergence theorem; meaningful only when
  // watertight and consistently oriented.
  double enclosed_volume() const;

  // Same topology, new positions (e.g. after skinning). Degenerate triangles
  // produced by the deformation are kept so ids remain aligned; the closed
  // flag is inherited.
  TriMesh with_vertices(std::vector<Vec3> vertices) const;

  TriMesh transformed(const Mat3& linear, const Vec3& offset) const;
  TriMesh translated(const Vec3& t) const { return transformed(Mat3::Identity(), t); }
  TriMesh scaled_about(const Vec3& center, double s) const;

  // Welds vertices closer than `tol` and re-runs cleanup.
  static TriMesh welded(const std::vector<Vec3>& vertices, const std::vector<Tri>& triangles,
                        double tol);
  // Concatenates meshes (disjoint components).
  static TriMesh merged(std::span<const TriMesh> parts);

 private:
  std::vector<Vec3> vertices_;
  std::vector<Tri> triangles_;
  bool watertight_ = false;
};

bool edges_closed(const std::vector<Tri>& triangles);

}  // namespace grasp

#endif  // GRASP_MESH_HPP
