#include "grasp/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "grasp/errors.hpp"

namespace grasp {

NearestHit closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
  // feature_vertices are local corner indices here; the index remaps them.
  NearestHit h;
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    h.point = a;
    h.feature = Feature::kVertex;
    h.feature_vertices = {0, -1};
    h.barycentric = {1, 0, 0};
    return h;
  }
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    h.point = b;
    h.feature = Feature::kVertex;
    h.feature_vertices = {1, -1};
    h.barycentric = {0, 1, 0};
    return h;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    h.point = a + v * ab;
    h.feature = Feature::kEdge;
    h.feature_vertices = {0, 1};
    h.barycentric = {1 - v, v, 0};
    return h;
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    h.point = c;
    h.feature = Feature::kVertex;
    h.feature_vertices = {2, -1};
    h.barycentric = {0, 0, 1};
    return h;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    h.point = a + w * ac;
    h.feature = Feature::kEdge;
    h.feature_vertices = {2, 0};
    h.barycentric = {1 - w, 0, w};
    return h;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    h.point = b + w * (c - b);
    h.feature = Feature::kEdge;
    h.feature_vertices = {1, 2};
    h.barycentric = {0, 1 - w, w};
    return h;
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  h.point = a + ab * v + ac * w;
  h.feature = Feature::kFace;
  h.barycentric = {1 - v - w, v, w};
  return h;
}

double triangle_solid_angle(const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ra = a - q, rb = b - q, rc = c - q;
  const double la = ra.norm(), lb = rb.norm(), lc = rc.norm();
  const double num = ra.dot(rb.cross(rc));
  const double den = la * lb * lc + ra.dot(rb) * lc + rb.dot(rc) * la + rc.dot(ra) * lb;
  return 2.0 * std::atan2(num, den);
}

AccelIndex::AccelIndex(TriMesh mesh, int leaf_size) : mesh_(std::move(mesh)) {
  if (mesh_.empty()) fail(ErrorCode::kInvalidMesh, "cannot index a mesh with no triangles");
  const size_t nt = mesh_.num_triangles();
  order_.resize(nt);
  tri_area_vector_.resize(nt);
  tri_center_.resize(nt);
  for (size_t t = 0; t < nt; ++t) {
    order_[t] = static_cast<int>(t);
    const auto [a, b, c] = mesh_.corners(t);
    tri_area_vector_[t] = 0.5 * (b - a).cross(c - a);
    tri_center_[t] = (a + b + c) / 3.0;
  }
  nodes_.reserve(2 * nt / static_cast<size_t>(std::max(1, leaf_size)) + 2);
  build(0, static_cast<int>(nt), std::max(1, leaf_size));
  compute_pseudo_normals();
}

int AccelIndex::build(int begin, int end, int leaf_size) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box, centers;
  Vec3 area_vec = Vec3::Zero(), weighted = Vec3::Zero();
  double area = 0.0;
  for (int i = begin; i < end; ++i) {
    const int t = order_[i];
    for (const Vec3& v : mesh_.corners(t)) box.extend(v);
    centers.extend(tri_center_[t]);
    const double a = tri_area_vector_[t].norm();
    area_vec += tri_area_vector_[t];
    weighted += a * tri_center_[t];
    area += a;
  }
  Node node;
  node.box = box;
  node.area_vector = area_vec;
  node.center = area > 0.0 ? Vec3(weighted / area) : box.center();
  double r2 = 0.0;
  for (int i = begin; i < end; ++i) {
    for (const Vec3& v : mesh_.corners(order_[i])) r2 = std::max(r2, (v - node.center).squaredNorm());
  }
  node.radius = std::sqrt(r2);

  if (end - begin <= leaf_size) {
    node.left = begin;
    node.right = -(end - begin);
    nodes_[id] = node;
    ++num_leaves_;
    return id;
  }
  int axis = 0;
  centers.extent().maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int x, int y) { return tri_center_[x][axis] < tri_center_[y][axis]; });
  nodes_[id] = node;
  const int l = build(begin, mid, leaf_size);
  const int r = build(mid, end, leaf_size);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

void AccelIndex::compute_pseudo_normals() {
  const auto& verts = mesh_.vertices();
  const auto& tris = mesh_.triangles();
  vertex_normals_.assign(verts.size(), Vec3::Zero());
  std::unordered_map<uint64_t, Vec3> edge_sum;
  auto key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
  };
  for (size_t t = 0; t < tris.size(); ++t) {
    const Vec3 n = tri_area_vector_[t].normalized();
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = verts[tris[t][k]];
      const Vec3 e1 = (verts[tris[t][(k + 1) % 3]] - p).normalized();
      const Vec3 e2 = (verts[tris[t][(k + 2) % 3]] - p).normalized();
      const double angle = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
      vertex_normals_[tris[t][k]] += angle * n;
      edge_sum[key(tris[t][k], tris[t][(k + 1) % 3])] += n;
    }
  }
  for (Vec3& n : vertex_normals_) {
    if (n.squaredNorm() > 0.0) n.normalize();
  }
  edge_normals_.resize(tris.size());
  for (size_t t = 0; t < tris.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      Vec3 n = edge_sum[key(tris[t][k], tris[t][(k + 1) % 3])];
      edge_normals_[t][k] = n.squaredNorm() > 0.0 ? Vec3(n.normalized()) : Vec3::Zero();
    }
  }
}

NearestHit AccelIndex::nearest(const Vec3& q) const {
  NearestHit best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squared_distance(q) >= best.squared_distance) continue;
    if (node.leaf()) {
      for (int i = node.left; i < node.left - node.right; ++i) {
        const int t = order_[i];
        const auto [a, b, c] = mesh_.corners(t);
        NearestHit h = closest_point_on_triangle(q, a, b, c);
        h.squared_distance = (h.point - q).squaredNorm();
        if (h.squared_distance < best.squared_distance) {
          const Tri& f = mesh_.triangles()[t];
          h.triangle = t;
          if (h.feature != Feature::kFace) {
            const int i0 = h.feature_vertices[0], i1 = h.feature_vertices[1];
            h.feature_vertices = {f[i0], i1 >= 0 ? f[i1] : -1};
          }
          best = h;
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squared_distance(q);
    const double dr = nodes_[node.right].box.squared_distance(q);
    // Push the farther child first so the nearer one is visited next.
    if (dl < dr) {
      if (dr < best.squared_distance) stack[top++] = node.right;
      if (dl < best.squared_distance) stack[top++] = node.left;
    } else {
      if (dl < best.squared_distance) stack[top++] = node.left;
      if (dr < best.squared_distance) stack[top++] = node.right;
    }
  }
  return best;
}

std::vector<RayHit> AccelIndex::ray_hits(const Vec3& origin, const Vec3& direction) const {
  std::vector<RayHit> hits;
  const Vec3 inv = direction.cwiseInverse();
  auto box_hit = [&](const Aabb& box) {
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      double ta = (box.lo[k] - origin[k]) * inv[k];
      double tb = (box.hi[k] - origin[k]) * inv[k];
      if (std::isnan(ta) || std::isnan(tb)) {
        if (origin[k] < box.lo[k] || origin[k] > box.hi[k]) return false;
        continue;
      }
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return false;
    }
    return true;
  };
  std::vector<int> stack = {0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!box_hit(node.box)) continue;
    if (!node.leaf()) {
      stack.push_back(node.left);
      stack.push_back(node.right);
      continue;
    }
    for (int i = node.left; i < node.left - node.right; ++i) {
      const int tri = order_[i];
      const auto [a, b, c] = mesh_.corners(tri);
      // Moller-Trumbore.
      const Vec3 e1 = b - a, e2 = c - a;
      const Vec3 pv = direction.cross(e2);
      const double det = e1.dot(pv);
      if (std::abs(det) < 1e-300) continue;
      const double inv_det = 1.0 / det;
      const Vec3 tv = origin - a;
      const double u = tv.dot(pv) * inv_det;
      if (u < 0.0 || u > 1.0) continue;
      const Vec3 qv = tv.cross(e1);
      const double v = direction.dot(qv) * inv_det;
      if (v < 0.0 || u + v > 1.0) continue;
      const double t = e2.dot(qv) * inv_det;
      if (t <= 0.0) continue;
      hits.push_back({t, tri, det < 0.0});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const RayHit& x, const RayHit& y) { return x.t < y.t; });
  return hits;
}

double AccelIndex::winding_number(const Vec3& q, double beta) const {
  double omega = 0.0;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    const Vec3 d = node.center - q;
    const double dist2 = d.squaredNorm();
    if (!node.box.contains(q) && dist2 > beta * beta * node.radius * node.radius) {
      omega += node.area_vector.dot(d) / (dist2 * std::sqrt(dist2));
      continue;
    }
    if (node.leaf()) {
      for (int i = node.left; i < node.left - node.right; ++i) {
        const auto [a, b, c] = mesh_.corners(order_[i]);
        omega += triangle_solid_angle(q, a, b, c);
      }
      continue;
    }
    stack[top++] = node.left;
    stack[top++] = node.right;
  }
  return omega / (4.0 * std::numbers::pi);
}

double AccelIndex::winding_number_exact(const Vec3& q) const {
  double omega = 0.0;
  for (size_t t = 0; t < mesh_.num_triangles(); ++t) {
    const auto [a, b, c] = mesh_.corners(t);
    omega += triangle_solid_angle(q, a, b, c);
  }
  return omega / (4.0 * std::numbers::pi);
}

Vec3 AccelIndex::pseudo_normal(const NearestHit& hit) const {
  const size_t t = static_cast<size_t>(hit.triangle);
  switch (hit.feature) {
    case Feature::kFace:
      return tri_area_vector_[t].normalized();
    case Feature::kVertex: {
      const Vec3& n = vertex_normals_[static_cast<size_t>(hit.feature_vertices[0])];
      return n.squaredNorm() > 0.0 ? n : Vec3(tri_area_vector_[t].normalized());
    }
    case Feature::kEdge: {
      const Tri& f = mesh_.triangles()[t];
      for (int k = 0; k < 3; ++k) {
        const int a = f[k], b = f[(k + 1) % 3];
        const auto& fv = hit.feature_vertices;
        if ((a == fv[0] && b == fv[1]) || (a == fv[1] && b == fv[0])) {
          const Vec3& n = edge_normals_[t][k];
          if (n.squaredNorm() > 0.0) return n;
        }
      }
      return tri_area_vector_[t].normalized();
    }
  }
  return tri_area_vector_[t].normalized();
}

}  // namespace grasp
