#include "grasp/sdf.hpp"

#include <cmath>

#include "grasp/errors.hpp"

namespace grasp {
namespace {

constexpr double kOnSurface = 1e-12;

SdfResult from_hit(const AccelIndex& index, const NearestHit& hit, const Vec3& q, double sign) {
  SdfResult r;
  const double d = std::sqrt(hit.squared_distance);
  r.value = sign * d;
  r.nearest = hit.point;
  if (d > kOnSurface) {
    r.gradient = sign * (q - hit.point) / d;
  } else {
    r.gradient = index.pseudo_normal(hit);
  }
  return r;
}

}  // namespace

AccelIndex build_bvh(const TriMesh& mesh) { return AccelIndex(mesh); }

SdfResult signed_distance(const TriMesh& mesh, const AccelIndex& index, const Vec3& query) {
  if (!mesh.watertight()) {
    fail(ErrorCode::kSignRequiresWatertight, "signed distance needs a closed mesh");
  }
  const NearestHit hit = index.nearest(query);
  const double sign = index.winding_number(query) >= 0.5 ? -1.0 : 1.0;
  return from_hit(index, hit, query, sign);
}

SdfResult unsigned_distance(const AccelIndex& index, const Vec3& query) {
  return from_hit(index, index.nearest(query), query, 1.0);
}

MeshSdf::MeshSdf(const TriMesh& mesh) : index_(std::make_shared<const AccelIndex>(mesh)) {}

SdfResult MeshSdf::query(const Vec3& p) const { return signed_distance(index_->mesh(), *index_, p); }

double MeshSdf::unsigned_value(const Vec3& p) const {
  return std::sqrt(index_->nearest(p).squared_distance);
}

bool MeshSdf::inside(const Vec3& p) const { return index_->winding_number(p) >= 0.5; }

}  // namespace grasp
