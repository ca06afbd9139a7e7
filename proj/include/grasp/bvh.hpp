#ifndef GRASP_BVH_HPP
#define GRASP_BVH_HPP

#include <vector>

#include "grasp/mesh.hpp"

namespace grasp {

// Which feature of the nearest triangle the closest point lies on.
enum class Feature { kFace, kEdge, kVertex };

struct NearestHit {
  Vec3 point;
  double squared_distance = 0.0;
  int triangle = -1;
  Feature feature = Feature::kFace;
  // Mesh vertex ids: {v, -1} for a vertex, {a, b} for an edge, unused for a face.
  std::array<int, 2> feature_vertices = {-1, -1};
  Vec3 barycentric = Vec3::Zero();
};

struct RayHit {
  double t = 0.0;
  int triangle = -1;
  bool front_facing = false;  // ray direction opposes the triangle normal
};

// Closest point on triangle (a, b, c) to p with feature classification.
NearestHit closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Bounding-volume hierarchy over a triangle mesh. Besides nearest-triangle
// and ray queries, every node carries the area-weighted dipole (sum of
// triangle area vectors and their center) used for fast generalized winding
// number evaluation.
//
// The index owns a copy of the mesh and is immutable after construction, so
// concurrent queries are safe.
class AccelIndex {
 public:
  explicit AccelIndex(TriMesh mesh, int leaf_size = 4);

  const TriMesh& mesh() const { return mesh_; }
  size_t num_leaves() const { return num_leaves_; }
  size_t num_nodes() const { return nodes_.size(); }

  NearestHit nearest(const Vec3& q) const;

  // All intersections with t > 0, sorted by t.
  std::vector<RayHit> ray_hits(const Vec3& origin, const Vec3& direction) const;

  // Generalized winding number. Nodes whose dipole center is farther than
  // `beta` times their radius use the first-order far-field expansion; the
  // rest are summed exactly from triangle solid angles.
  double winding_number(const Vec3& q, double beta = 2.0) const;
  double winding_number_exact(const Vec3& q) const;

  // Angle-weighted pseudo-normal of the feature the hit lies on.
  Vec3 pseudo_normal(const NearestHit& hit) const;

 private:
  struct Node {
    Aabb box;
    int left = -1;   // child index, or first primitive for leaves
    int right = -1;  // child index, or -count for leaves
    Vec3 area_vector = Vec3::Zero();
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
    bool leaf() const { return right < 0; }
  };

  int build(int begin, int end, int leaf_size);
  void compute_pseudo_normals();

  TriMesh mesh_;
  std::vector<int> order_;  // triangle ids referenced by leaves
  std::vector<Node> nodes_;
  std::vector<Vec3> tri_area_vector_;
  std::vector<Vec3> tri_center_;
  std::vector<Vec3> vertex_normals_;
  std::vector<std::array<Vec3, 3>> edge_normals_;  // per triangle, edge k = (k, k+1)
  size_t num_leaves_ = 0;
};

// Signed solid angle of triangle (a, b, c) seen from q (Van Oosterom-Strackee).
double triangle_solid_angle(const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace grasp

#endif  // GRASP_BVH_HPP
