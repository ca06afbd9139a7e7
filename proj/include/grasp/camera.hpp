#ifndef GRASP_CAMERA_HPP
#define GRASP_CAMERA_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "grasp/mesh.hpp"
#include "grasp/rigid.hpp"

namespace grasp {

inline constexpr double kZNear = 1e-4;
inline constexpr size_t kDefaultMaskBudget = 4096;

struct CameraIntrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 250.0;
  double cy = 250.0;
  int width = 500;
  int height = 500;

  // Throws InvalidParams when the invariants do not hold.
  void validate() const;
  bool in_frame(const Vec2& p) const { return p.x() >= 0.0 && p.x() < width && p.y() >= 0.0 && p.y() < height; }
};

// Binary foreground bitmap, row-major with x fastest. Foreground pixel
// centers (x + 0.5, y + 0.5) are cached at construction.
class MaskImage {
 public:
  MaskImage() = default;
  MaskImage(int width, int height, std::vector<uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[static_cast<size_t>(y) * width_ + x] != 0; }
  // One byte per pixel, 0 or 1.
  const std::vector<uint8_t>& bits() const { return bits_; }
  const std::vector<Vec2>& foreground() const { return foreground_; }
  size_t foreground_count() const { return foreground_.size(); }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> bits_;
  std::vector<Vec2> foreground_;
};

struct ProjectedSet {
  std::vector<Vec2> points;
  std::vector<uint8_t> visible;

  std::vector<Vec2> visible_points() const;
  size_t visible_count() const;
};

// Camera sits at the origin looking down +z; pose maps object to camera frame.
ProjectedSet project_points(std::span<const Vec3> points, const RigidTransform& pose, const CameraIntrinsics& k,
                            double z_near = kZNear);
ProjectedSet project_points(std::span<const Vec3> points, const ObjectPose& pose, const CameraIntrinsics& k,
                            double z_near = kZNear);

// Uniform-grid nearest-neighbour index over a fixed 2D point set.
class PointGrid2d {
 public:
  explicit PointGrid2d(std::span<const Vec2> points);

  size_t size() const { return points_.size(); }
  // Squared distance to the nearest indexed point.
  double nearest_squared(const Vec2& q) const;

 private:
  std::vector<Vec2> points_;
  Vec2 origin_ = Vec2::Zero();
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<int> cell_start_;
  std::vector<int> order_;
};

struct Chamfer2d {
  double forward_sum = 0.0;   // over a: nearest squared distance to b
  double backward_sum = 0.0;  // over b: nearest squared distance to a
  size_t a_count = 0;
  size_t b_count = 0;

  double raw() const { return forward_sum + backward_sum; }
  // Each directed sum divided by its cardinality.
  double normalized() const {
    return forward_sum / static_cast<double>(a_count) + backward_sum / static_cast<double>(b_count);
  }
};

// Throws NoVisiblePoints when either side is empty.
Chamfer2d chamfer_2d(std::span<const Vec2> a, std::span<const Vec2> b);
Chamfer2d chamfer_2d(const ProjectedSet& a, std::span<const Vec2> b);
// Variant reusing a prebuilt index over b.
Chamfer2d chamfer_2d(std::span<const Vec2> a, std::span<const Vec2> b, const PointGrid2d& b_index);
Chamfer2d chamfer_2d_exhaustive(std::span<const Vec2> a, std::span<const Vec2> b);

// Symmetric mean of nearest-neighbour distances (pixels).
double mean_nearest_distance(std::span<const Vec2> a, std::span<const Vec2> b);

// All foreground centers when under budget, else a seeded uniform subsample.
// boundary_only keeps pixels with a 4-neighbour outside the foreground.
std::vector<Vec2> mask_foreground_points(const MaskImage& mask, size_t budget = kDefaultMaskBudget,
                                         uint64_t seed = 0, bool boundary_only = false);

MaskImage rasterize_mask(const TriMesh& mesh, const RigidTransform& pose, const CameraIntrinsics& k);
MaskImage rasterize_mask(const TriMesh& mesh, const ObjectPose& pose, const CameraIntrinsics& k);

}  // namespace grasp

#endif  // GRASP_CAMERA_HPP
