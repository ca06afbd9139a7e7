#ifndef GRASP_PRIMITIVES_HPP
#define GRASP_PRIMITIVES_HPP

#include <vector>

#include "grasp/mesh.hpp"

namespace grasp {

// All primitives are closed, outward oriented and centered at the origin
// unless noted.

TriMesh make_icosphere(double radius, int subdivisions);

// Axis-aligned box with each face split into an n x n grid.
TriMesh make_box(const Vec3& size, int divisions = 1);

// Cylinder along z.
TriMesh make_cylinder(double radius, double height, int segments, int stacks = 1);

// Surface of revolution about z of a closed profile given as (r, z) pairs in
// counter-clockwise order in the (r, z) half-plane. Profile points with r == 0
// become poles.
TriMesh make_lathe(const std::vector<Vec2>& profile, int segments);

// A mug-like cup: solid walls and bottom, open top rim.
TriMesh make_lathe_mug(double outer_radius, double height, double wall, int segments);

// Single quad in the plane z = `z`, spanning [-hx, hx] x [-hy, hy], normal +z.
// Not closed.
TriMesh make_quad(double hx, double hy, double z);

// Largest distance between the icosphere surface and the true sphere.
double icosphere_chordal_error(double radius, int subdivisions);

}  // namespace grasp

#endif  // GRASP_PRIMITIVES_HPP
