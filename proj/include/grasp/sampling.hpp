#ifndef GRASP_SAMPLING_HPP
#define GRASP_SAMPLING_HPP

#include <cstdint>
#include <vector>

#include "grasp/mesh.hpp"

namespace grasp {

enum class SampleSource { kObjectSurface, kHandSurface, kHandContact };

struct PointSample {
  Vec3 position = Vec3::Zero();
  SampleSource source = SampleSource::kObjectSurface;
  int triangle = -1;               // -1 when not attached to a triangle
  Vec3 barycentric = Vec3::Zero(); // valid when triangle >= 0
  int vertex = -1;                 // mesh vertex id for vertex-attached samples
};

// `n` area-weighted uniform samples on the surface (seeded).
std::vector<PointSample> sample_surface(const TriMesh& mesh, size_t n, uint64_t seed,
                                        SampleSource source = SampleSource::kObjectSurface);

// Farthest-point sampling over a dense area-weighted pre-sample of
// max(50 n, 20000) points (or `dense_size` when nonzero). The first point is a
// seeded draw from the pre-sample.
std::vector<PointSample> farthest_point_sample(const TriMesh& mesh, size_t n, uint64_t seed,
                                               SampleSource source = SampleSource::kObjectSurface,
                                               size_t dense_size = 0);

std::vector<Vec3> positions(const std::vector<PointSample>& samples);

}  // namespace grasp

#endif  // GRASP_SAMPLING_HPP
