#include "grasp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "grasp/errors.hpp"

namespace grasp {

std::vector<PointSample> sample_surface(const TriMesh& mesh, size_t n, uint64_t seed,
                                        SampleSource source) {
  if (mesh.empty()) fail(ErrorCode::kInvalidMesh, "cannot sample an empty mesh");
  std::vector<double> cdf(mesh.num_triangles());
  double total = 0.0;
  for (size_t t = 0; t < cdf.size(); ++t) {
    total += mesh.triangle_area(t);
    cdf[t] = total;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<PointSample> out(n);
  for (size_t i = 0; i < n; ++i) {
    const double r = unit(rng) * total;
    const size_t t = std::min(static_cast<size_t>(std::upper_bound(cdf.begin(), cdf.end(), r) - cdf.begin()),
                              cdf.size() - 1);
    const double s = std::sqrt(unit(rng));
    const double u = unit(rng);
    const Vec3 bary(1.0 - s, s * (1.0 - u), s * u);
    const auto [a, b, c] = mesh.corners(t);
    out[i].position = bary[0] * a + bary[1] * b + bary[2] * c;
    out[i].source = source;
    out[i].triangle = static_cast<int>(t);
    out[i].barycentric = bary;
  }
  return out;
}

std::vector<PointSample> farthest_point_sample(const TriMesh& mesh, size_t n, uint64_t seed,
                                               SampleSource source, size_t dense_size) {
  if (n < 1) fail(ErrorCode::kSampleBudgetExceeded, "farthest-point sampling needs n >= 1");
  if (mesh.empty()) fail(ErrorCode::kInvalidMesh, "cannot sample an empty mesh");
  const size_t dense_n = dense_size > 0 ? dense_size : std::max<size_t>(50 * n, 20000);
  if (n > dense_n) {
    fail(ErrorCode::kSampleBudgetExceeded,
         "requested " + std::to_string(n) + " points from a pre-sample of " + std::to_string(dense_n));
  }
  const std::vector<PointSample> dense = sample_surface(mesh, dense_n, seed, source);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  size_t current = std::uniform_int_distribution<size_t>(0, dense_n - 1)(rng);

  std::vector<double> min_d2(dense_n, std::numeric_limits<double>::infinity());
  std::vector<PointSample> out;
  out.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    out.push_back(dense[current]);
    const Vec3 c = dense[current].position;
    size_t next = 0;
    double best = -1.0;
    for (size_t i = 0; i < dense_n; ++i) {
      const double d2 = (dense[i].position - c).squaredNorm();
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (min_d2[i] > best) {
        best = min_d2[i];
        next = i;
      }
    }
    current = next;
  }
  return out;
}

std::vector<Vec3> positions(const std::vector<PointSample>& samples) {
  std::vector<Vec3> p(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) p[i] = samples[i].position;
  return p;
}

}  // namespace grasp
