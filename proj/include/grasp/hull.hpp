#ifndef GRASP_HULL_HPP
#define GRASP_HULL_HPP

#include <span>
#include <vector>

#include "grasp/mesh.hpp"

namespace grasp {

// Convex hull by incremental insertion. Faces are outward oriented and index
// into the input point array. Throws DegenerateHull when fewer than four
// non-coplanar points exist.
struct ConvexHull {
  std::vector<Tri> faces;
  double volume = 0.0;
};

ConvexHull convex_hull(std::span<const Vec3> points);
double convex_hull_volume(std::span<const Vec3> points);

}  // namespace grasp

#endif  // GRASP_HULL_HPP
