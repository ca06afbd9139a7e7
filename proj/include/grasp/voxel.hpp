#ifndef GRASP_VOXEL_HPP
#define GRASP_VOXEL_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "grasp/mesh.hpp"

namespace grasp {

inline constexpr size_t kDefaultCellBudget = size_t{1} << 26;

struct GridSpec {
  Vec3 origin = Vec3::Zero();  // min corner of cell (0, 0, 0)
  double voxel_size = 0.0;
  std::array<int, 3> dims = {0, 0, 0};

  size_t cell_count() const {
    return static_cast<size_t>(dims[0]) * static_cast<size_t>(dims[1]) * static_cast<size_t>(dims[2]);
  }
  Vec3 center(int i, int j, int k) const {
    return origin + voxel_size * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  // Cells covering `box`, optionally padded by whole voxels.
  static GridSpec covering(const Aabb& box, double voxel_size, int pad);
};

struct OccupancyGrid {
  GridSpec spec;
  std::vector<uint8_t> occupied;  // x-fastest, then y, then z

  size_t index(int i, int j, int k) const {
    return static_cast<size_t>(i) +
           static_cast<size_t>(spec.dims[0]) *
               (static_cast<size_t>(j) + static_cast<size_t>(spec.dims[1]) * static_cast<size_t>(k));
  }
  size_t count() const;
  double volume() const;
};

// Occupancy of voxel centers on a given grid. Inside means winding number
// >= 0.5; for a closed mesh the winding number along a z-column is the
// running sum of signed surface crossings, which is what is evaluated here
// (with a top-left tie rule so shared edges are counted once).
OccupancyGrid occupancy_on_grid(const TriMesh& mesh, const GridSpec& spec,
                                size_t cell_budget = kDefaultCellBudget);

// Grid over the mesh bounds padded by one voxel.
OccupancyGrid voxelize_occupancy(const TriMesh& mesh, double voxel_size,
                                 size_t cell_budget = kDefaultCellBudget);

}  // namespace grasp

#endif  // GRASP_VOXEL_HPP
