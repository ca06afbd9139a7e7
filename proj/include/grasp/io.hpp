#ifndef GRASP_IO_HPP
#define GRASP_IO_HPP

#include <filesystem>

#include "grasp/camera.hpp"
#include "grasp/hand.hpp"
#include "grasp/mesh.hpp"

namespace grasp {

// Missing files throw MissingAsset; malformed files throw IoError.

// OBJ (v and f records; polygons fan-triangulated) or binary little-endian
// PLY, chosen by extension. Positions are multiplied by unit_scale.
TriMesh load_mesh(const std::filesystem::path& path, double unit_scale = 1.0);
TriMesh load_obj(const std::filesystem::path& path, double unit_scale = 1.0);
TriMesh load_ply(const std::filesystem::path& path, double unit_scale = 1.0);

// Coordinates are written losslessly (17 significant digits or doubles).
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);
void save_ply(const TriMesh& mesh, const std::filesystem::path& path);

// 8-bit single-channel PNG or PGM (P5 or P2); nonzero is foreground. Other
// PNG color types are converted to gray first.
MaskImage load_mask(const std::filesystem::path& path);
// Foreground is written as 255.
void save_mask(const MaskImage& mask, const std::filesystem::path& path);

// Rig container: a JSON header at `path` and little-endian float32 arrays in
// a sibling ".bin" file named by the header. Skinning weight rows are
// renormalized after the float32 round trip.
HandRig load_rig(const std::filesystem::path& path);
void save_rig(const HandRig& rig, const std::filesystem::path& path);

}  // namespace grasp

#endif  // GRASP_IO_HPP
