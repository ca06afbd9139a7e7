#include "grasp/voxel.hpp"

#include <algorithm>
#include <cmath>

#include "grasp/errors.hpp"

namespace grasp {
namespace {

struct Crossing {
  double z;
  int delta;  // +1 entering (surface faces -z), -1 leaving
};

bool top_left(const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  return e.y() < 0.0 || (e.y() == 0.0 && e.x() < 0.0);
}

double edge_fn_raw(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Evaluated in a canonical endpoint order so the two triangles sharing an
// edge see exactly opposite values.
double edge_fn(const Vec2& a, const Vec2& b, const Vec2& p) {
  const bool swap = a.x() > b.x() || (a.x() == b.x() && a.y() > b.y());
  return swap ? -edge_fn_raw(b, a, p) : edge_fn_raw(a, b, p);
}

bool covers(double e, bool tl) { return e > 0.0 || (e == 0.0 && tl); }

}  // namespace

GridSpec GridSpec::covering(const Aabb& box, double voxel_size, int pad) {
  GridSpec g;
  g.voxel_size = voxel_size;
  g.origin = box.lo - Vec3::Constant(pad * voxel_size);
  for (int k = 0; k < 3; ++k) {
    const double ext = std::max(0.0, box.hi[k] - box.lo[k]);
    g.dims[k] = static_cast<int>(std::ceil(ext / voxel_size)) + 2 * pad;
    g.dims[k] = std::max(g.dims[k], 1);
  }
  return g;
}

size_t OccupancyGrid::count() const {
  return static_cast<size_t>(std::count(occupied.begin(), occupied.end(), uint8_t{1}));
}

double OccupancyGrid::volume() const {
  const double v = spec.voxel_size;
  return static_cast<double>(count()) * v * v * v;
}

OccupancyGrid occupancy_on_grid(const TriMesh& mesh, const GridSpec& spec, size_t cell_budget) {
  if (!(spec.voxel_size > 0.0)) fail(ErrorCode::kInvalidParams, "voxel size must be positive");
  if (!mesh.watertight()) fail(ErrorCode::kSignRequiresWatertight, "voxelization needs a closed mesh");
  const double cells = static_cast<double>(spec.dims[0]) * spec.dims[1] * spec.dims[2];
  if (cells > static_cast<double>(cell_budget)) {
    fail(ErrorCode::kGridTooLarge, std::to_string(static_cast<size_t>(cells)) + " cells exceeds budget " +
                                       std::to_string(cell_budget));
  }
  OccupancyGrid grid;
  grid.spec = spec;
  grid.occupied.assign(spec.cell_count(), 0);
  const int nx = spec.dims[0], ny = spec.dims[1], nz = spec.dims[2];
  const double vs = spec.voxel_size;

  std::vector<std::vector<Crossing>> columns(static_cast<size_t>(nx) * ny);
  for (size_t t = 0; t < mesh.num_triangles(); ++t) {
    auto [a, b, c] = mesh.corners(t);
    Vec2 pa(a.x(), a.y()), pb(b.x(), b.y()), pc(c.x(), c.y());
    const double area2 = edge_fn(pa, pb, pc);
    if (area2 == 0.0) continue;
    // Normal z > 0 means crossing upward leaves the solid.
    const int delta = area2 > 0.0 ? -1 : +1;
    if (area2 < 0.0) {
      std::swap(pb, pc);
      std::swap(b, c);
    }
    const double xmin = std::min({pa.x(), pb.x(), pc.x()}), xmax = std::max({pa.x(), pb.x(), pc.x()});
    const double ymin = std::min({pa.y(), pb.y(), pc.y()}), ymax = std::max({pa.y(), pb.y(), pc.y()});
    const int i0 = std::max(0, static_cast<int>(std::floor((xmin - spec.origin.x()) / vs - 0.5)));
    const int i1 = std::min(nx - 1, static_cast<int>(std::ceil((xmax - spec.origin.x()) / vs - 0.5)));
    const int j0 = std::max(0, static_cast<int>(std::floor((ymin - spec.origin.y()) / vs - 0.5)));
    const int j1 = std::min(ny - 1, static_cast<int>(std::ceil((ymax - spec.origin.y()) / vs - 0.5)));
    const bool tl_ab = top_left(pa, pb), tl_bc = top_left(pb, pc), tl_ca = top_left(pc, pa);
    const double inv_area = 1.0 / edge_fn(pa, pb, pc);
    for (int j = j0; j <= j1; ++j) {
      const double y = spec.origin.y() + (j + 0.5) * vs;
      for (int i = i0; i <= i1; ++i) {
        const Vec2 p(spec.origin.x() + (i + 0.5) * vs, y);
        const double ea = edge_fn(pb, pc, p), eb = edge_fn(pc, pa, p), ec = edge_fn(pa, pb, p);
        if (!covers(ea, tl_bc) || !covers(eb, tl_ca) || !covers(ec, tl_ab)) continue;
        const double z = (ea * a.z() + eb * b.z() + ec * c.z()) * inv_area;
        columns[static_cast<size_t>(j) * nx + i].push_back({z, delta});
      }
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      auto& col = columns[static_cast<size_t>(j) * nx + i];
      if (col.empty()) continue;
      std::sort(col.begin(), col.end(), [](const Crossing& x, const Crossing& y) { return x.z < y.z; });
      size_t next = 0;
      int winding = 0;
      for (int k = 0; k < nz; ++k) {
        const double z = spec.origin.z() + (k + 0.5) * vs;
        while (next < col.size() && col[next].z < z) winding += col[next++].delta;
        if (winding >= 1) grid.occupied[grid.index(i, j, k)] = 1;
      }
    }
  }
  return grid;
}

OccupancyGrid voxelize_occupancy(const TriMesh& mesh, double voxel_size, size_t cell_budget) {
  if (!(voxel_size > 0.0)) fail(ErrorCode::kInvalidParams, "voxel size must be positive");
  if (mesh.empty()) fail(ErrorCode::kInvalidMesh, "cannot voxelize an empty mesh");
  return occupancy_on_grid(mesh, GridSpec::covering(mesh.bounds(), voxel_size, 1), cell_budget);
}

}  // namespace grasp
