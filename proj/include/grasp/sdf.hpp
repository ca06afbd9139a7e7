#ifndef GRASP_SDF_HPP
#define GRASP_SDF_HPP

#include <memory>

#include "grasp/bvh.hpp"

namespace grasp {

struct SdfResult {
  double value = 0.0;      // meters, negative inside
  Vec3 gradient;           // unit, direction of increasing value
  Vec3 nearest;            // closest surface point
};

AccelIndex build_bvh(const TriMesh& mesh);

// Signed distance. The sign comes from the generalized winding number
// (>= 0.5 is inside); the gradient is the unit vector from the nearest point
// toward the query, flipped inside, or the angle-weighted pseudo-normal when
// the query sits on the surface. Throws SignRequiresWatertight for open meshes.
SdfResult signed_distance(const TriMesh& mesh, const AccelIndex& index, const Vec3& query);

// Unsigned variant, valid for any mesh. `value` is >= 0 and the gradient
// points away from the surface.
SdfResult unsigned_distance(const AccelIndex& index, const Vec3& query);

// Convenience owner of a mesh index for repeated queries.
class MeshSdf {
 public:
  explicit MeshSdf(const TriMesh& mesh);

  const TriMesh& mesh() const { return index_->mesh(); }
  const AccelIndex& index() const { return *index_; }

  SdfResult query(const Vec3& p) const;
  double value(const Vec3& p) const { return query(p).value; }
  double unsigned_value(const Vec3& p) const;
  bool inside(const Vec3& p) const;

 private:
  std::shared_ptr<const AccelIndex> index_;
};

}  // namespace grasp

#endif  // GRASP_SDF_HPP
