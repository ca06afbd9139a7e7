#include "grasp/camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "grasp/errors.hpp"

namespace grasp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxGridSide = 2048;

ProjectedSet project_camera_frame(std::span<const Vec3> points, const Mat3& linear, const Vec3& offset,
                                  const CameraIntrinsics& k, double z_near) {
  ProjectedSet out;
  out.points.resize(points.size());
  out.visible.assign(points.size(), 0);
  for (size_t i = 0; i < points.size(); ++i) {
    const Vec3 c = linear * points[i] + offset;
    if (!(c.z() > z_near)) {
      out.points[i] = Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const Vec2 p(k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy);
    out.points[i] = p;
    out.visible[i] = k.in_frame(p) ? 1 : 0;
  }
  return out;
}

MaskImage rasterize_camera_frame(const TriMesh& mesh, const Mat3& linear, const Vec3& offset,
                                 const CameraIntrinsics& k) {
  if (mesh.empty()) fail(ErrorCode::kInvalidMesh, "cannot rasterize an empty mesh");
  k.validate();
  std::vector<Vec2> uv(mesh.num_vertices());
  std::vector<uint8_t> front(mesh.num_vertices(), 0);
  for (size_t i = 0; i < mesh.num_vertices(); ++i) {
    const Vec3 c = linear * mesh.vertex(i) + offset;
    if (c.z() > kZNear) {
      front[i] = 1;
      uv[i] = Vec2(k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy);
    }
  }
  std::vector<uint8_t> bits(static_cast<size_t>(k.width) * k.height, 0);
  for (const Tri& t : mesh.triangles()) {
    if (!front[t[0]] || !front[t[1]] || !front[t[2]]) continue;
    const Vec2 &a = uv[t[0]], &b = uv[t[1]], &c = uv[t[2]];
    const double area = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (area == 0.0) continue;
    const double s = area > 0.0 ? 1.0 : -1.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}) - 0.5)));
    const int x1 = std::min(k.width - 1, static_cast<int>(std::ceil(std::max({a.x(), b.x(), c.x()}) - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}) - 0.5)));
    const int y1 = std::min(k.height - 1, static_cast<int>(std::ceil(std::max({a.y(), b.y(), c.y()}) - 0.5)));
    auto edge = [s](const Vec2& p, const Vec2& q, double x, double y) {
      return s * ((q.x() - p.x()) * (y - p.y()) - (q.y() - p.y()) * (x - p.x()));
    };
    for (int y = y0; y <= y1; ++y) {
      const double py = y + 0.5;
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5;
        if (edge(a, b, px, py) >= 0.0 && edge(b, c, px, py) >= 0.0 && edge(c, a, px, py) >= 0.0) {
          bits[static_cast<size_t>(y) * k.width + x] = 1;
        }
      }
    }
  }
  MaskImage mask(k.width, k.height, std::move(bits));
  if (mask.foreground_count() == 0) fail(ErrorCode::kEmptyMask, "projected mesh covers no pixel centers");
  return mask;
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorCode::kInvalidParams, "focal lengths must be positive");
  if (width <= 0 || height <= 0) fail(ErrorCode::kInvalidParams, "image size must be positive");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    fail(ErrorCode::kInvalidParams, "principal point outside the image");
  }
}

MaskImage::MaskImage(int width, int height, std::vector<uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width < 0 || height < 0 || bits_.size() != static_cast<size_t>(width) * height) {
    fail(ErrorCode::kInvalidParams, "mask bitmap size does not match its dimensions");
  }
  for (uint8_t& b : bits_) b = b != 0 ? 1 : 0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (at(x, y)) foreground_.emplace_back(x + 0.5, y + 0.5);
    }
  }
}

std::vector<Vec2> ProjectedSet::visible_points() const {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    if (visible[i]) out.push_back(points[i]);
  }
  return out;
}

size_t ProjectedSet::visible_count() const {
  return static_cast<size_t>(std::count(visible.begin(), visible.end(), uint8_t{1}));
}

ProjectedSet project_points(std::span<const Vec3> points, const RigidTransform& pose, const CameraIntrinsics& k,
                            double z_near) {
  return project_camera_frame(points, pose.rotation(), pose.translation(), k, z_near);
}

ProjectedSet project_points(std::span<const Vec3> points, const ObjectPose& pose, const CameraIntrinsics& k,
                            double z_near) {
  return project_camera_frame(points, pose.scale * pose.rigid.rotation(), pose.rigid.translation(), k, z_near);
}

PointGrid2d::PointGrid2d(std::span<const Vec2> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) return;
  Vec2 lo = points_[0], hi = points_[0];
  for (const Vec2& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 ext = hi - lo;
  const double n = static_cast<double>(points_.size());
  double cell = std::sqrt(std::max(ext.x() * ext.y(), 1e-300) * 2.0 / n);
  cell = std::max({cell, ext.maxCoeff() / kMaxGridSide, 1e-9});
  origin_ = lo;
  cell_ = cell;
  nx_ = std::clamp(static_cast<int>(ext.x() / cell) + 1, 1, kMaxGridSide + 1);
  ny_ = std::clamp(static_cast<int>(ext.y() / cell) + 1, 1, kMaxGridSide + 1);

  std::vector<int> cell_of(points_.size());
  cell_start_.assign(static_cast<size_t>(nx_) * ny_ + 1, 0);
  for (size_t i = 0; i < points_.size(); ++i) {
    const int cx = std::clamp(static_cast<int>((points_[i].x() - origin_.x()) / cell_), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>((points_[i].y() - origin_.y()) / cell_), 0, ny_ - 1);
    cell_of[i] = cy * nx_ + cx;
    ++cell_start_[cell_of[i] + 1];
  }
  for (size_t c = 1; c < cell_start_.size(); ++c) cell_start_[c] += cell_start_[c - 1];
  order_.resize(points_.size());
  std::vector<int> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (size_t i = 0; i < points_.size(); ++i) order_[fill[cell_of[i]]++] = static_cast<int>(i);
}

double PointGrid2d::nearest_squared(const Vec2& q) const {
  if (points_.empty()) return kInf;
  const int ci = std::clamp(static_cast<int>(std::floor((q.x() - origin_.x()) / cell_)), 0, nx_ - 1);
  const int cj = std::clamp(static_cast<int>(std::floor((q.y() - origin_.y()) / cell_)), 0, ny_ - 1);
  double best = kInf;
  auto scan = [&](int i, int j) {
    const int c = j * nx_ + i;
    for (int s = cell_start_[c]; s < cell_start_[c + 1]; ++s) {
      best = std::min(best, (points_[order_[s]] - q).squaredNorm());
    }
  };
  const int max_r = std::max({ci, nx_ - 1 - ci, cj, ny_ - 1 - cj});
  for (int r = 0; r <= max_r; ++r) {
    const int i_lo = ci - r, i_hi = ci + r, j_lo = cj - r, j_hi = cj + r;
    for (int j = std::max(j_lo, 0); j <= std::min(j_hi, ny_ - 1); ++j) {
      if (j == j_lo || j == j_hi) {
        for (int i = std::max(i_lo, 0); i <= std::min(i_hi, nx_ - 1); ++i) scan(i, j);
      } else {
        if (i_lo >= 0) scan(i_lo, j);
        if (i_hi < nx_) scan(i_hi, j);
      }
    }
    // Distance from q to any cell outside the visited block.
    double bound = kInf;
    if (i_lo > 0) bound = std::min(bound, std::max(0.0, q.x() - (origin_.x() + i_lo * cell_)));
    if (i_hi < nx_ - 1) bound = std::min(bound, std::max(0.0, origin_.x() + (i_hi + 1) * cell_ - q.x()));
    if (j_lo > 0) bound = std::min(bound, std::max(0.0, q.y() - (origin_.y() + j_lo * cell_)));
    if (j_hi < ny_ - 1) bound = std::min(bound, std::max(0.0, origin_.y() + (j_hi + 1) * cell_ - q.y()));
    if (best <= bound * bound) break;
  }
  return best;
}

Chamfer2d chamfer_2d(std::span<const Vec2> a, std::span<const Vec2> b, const PointGrid2d& b_index) {
  if (a.empty() || b.empty()) fail(ErrorCode::kNoVisiblePoints, "chamfer needs two nonempty point sets");
  Chamfer2d out;
  out.a_count = a.size();
  out.b_count = b.size();
  for (const Vec2& p : a) out.forward_sum += b_index.nearest_squared(p);
  const PointGrid2d a_index(a);
  for (const Vec2& p : b) out.backward_sum += a_index.nearest_squared(p);
  return out;
}

Chamfer2d chamfer_2d(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kNoVisiblePoints, "chamfer needs two nonempty point sets");
  return chamfer_2d(a, b, PointGrid2d(b));
}

Chamfer2d chamfer_2d(const ProjectedSet& a, std::span<const Vec2> b) {
  const std::vector<Vec2> visible = a.visible_points();
  return chamfer_2d(visible, b);
}

Chamfer2d chamfer_2d_exhaustive(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kNoVisiblePoints, "chamfer needs two nonempty point sets");
  auto directed = [](std::span<const Vec2> from, std::span<const Vec2> to) {
    double sum = 0.0;
    for (const Vec2& p : from) {
      double best = kInf;
      for (const Vec2& q : to) best = std::min(best, (q - p).squaredNorm());
      sum += best;
    }
    return sum;
  };
  Chamfer2d out;
  out.a_count = a.size();
  out.b_count = b.size();
  out.forward_sum = directed(a, b);
  out.backward_sum = directed(b, a);
  return out;
}

double mean_nearest_distance(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kNoVisiblePoints, "nearest distance needs two nonempty point sets");
  const PointGrid2d ia(a), ib(b);
  double sa = 0.0, sb = 0.0;
  for (const Vec2& p : a) sa += std::sqrt(ib.nearest_squared(p));
  for (const Vec2& p : b) sb += std::sqrt(ia.nearest_squared(p));
  return 0.5 * (sa / static_cast<double>(a.size()) + sb / static_cast<double>(b.size()));
}

std::vector<Vec2> mask_foreground_points(const MaskImage& mask, size_t budget, uint64_t seed, bool boundary_only) {
  if (mask.foreground_count() == 0) fail(ErrorCode::kEmptyMask, "mask has no foreground pixels");
  if (budget == 0) fail(ErrorCode::kInvalidParams, "mask point budget must be positive");
  std::vector<Vec2> pool;
  if (boundary_only) {
    auto fg = [&](int x, int y) {
      return x >= 0 && y >= 0 && x < mask.width() && y < mask.height() && mask.at(x, y);
    };
    for (const Vec2& p : mask.foreground()) {
      const int x = static_cast<int>(p.x()), y = static_cast<int>(p.y());
      if (!fg(x - 1, y) || !fg(x + 1, y) || !fg(x, y - 1) || !fg(x, y + 1)) pool.push_back(p);
    }
  } else {
    pool = mask.foreground();
  }
  if (pool.size() <= budget) return pool;
  std::vector<Vec2> out;
  out.reserve(budget);
  std::mt19937_64 rng(seed);
  std::sample(pool.begin(), pool.end(), std::back_inserter(out), budget, rng);
  return out;
}

MaskImage rasterize_mask(const TriMesh& mesh, const RigidTransform& pose, const CameraIntrinsics& k) {
  return rasterize_camera_frame(mesh, pose.rotation(), pose.translation(), k);
}

MaskImage rasterize_mask(const TriMesh& mesh, const ObjectPose& pose, const CameraIntrinsics& k) {
  return rasterize_camera_frame(mesh, pose.scale * pose.rigid.rotation(), pose.rigid.translation(), k);
}

}  // namespace grasp
