#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "grasp/errors.hpp"
#include "grasp/io.hpp"
#include "io_util.hpp"

namespace grasp {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

int obj_index(const std::string& token, int count, const std::filesystem::path& path) {
  const std::string head = token.substr(0, token.find('/'));
  int idx = 0;
  try {
    idx = std::stoi(head);
  } catch (const std::exception&) {
    fail(ErrorCode::kIoError, path.string() + ": bad face index '" + token + "'");
  }
  if (idx > 0) return idx - 1;
  if (idx < 0) return count + idx;
  fail(ErrorCode::kIoError, path.string() + ": face index 0");
}

enum class PlyType { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32, kFloat64 };

PlyType ply_type(const std::string& name, const std::filesystem::path& path) {
  if (name == "char" || name == "int8") return PlyType::kInt8;
  if (name == "uchar" || name == "uint8") return PlyType::kUint8;
  if (name == "short" || name == "int16") return PlyType::kInt16;
  if (name == "ushort" || name == "uint16") return PlyType::kUint16;
  if (name == "int" || name == "int32") return PlyType::kInt32;
  if (name == "uint" || name == "uint32") return PlyType::kUint32;
  if (name == "float" || name == "float32") return PlyType::kFloat32;
  if (name == "double" || name == "float64") return PlyType::kFloat64;
  fail(ErrorCode::kIoError, path.string() + ": unknown PLY type '" + name + "'");
}

size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUint8:
      return 1;
    case PlyType::kInt16:
    case PlyType::kUint16:
      return 2;
    case PlyType::kInt32:
    case PlyType::kUint32:
    case PlyType::kFloat32:
      return 4;
    case PlyType::kFloat64:
      return 8;
  }
  return 0;
}

template <typename T>
T read_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) v = byteswap_value(v);
  return v;
}

double read_ply_value(PlyType t, const char* p) {
  switch (t) {
    case PlyType::kInt8:
      return read_le<int8_t>(p);
    case PlyType::kUint8:
      return read_le<uint8_t>(p);
    case PlyType::kInt16:
      return read_le<int16_t>(p);
    case PlyType::kUint16:
      return read_le<uint16_t>(p);
    case PlyType::kInt32:
      return read_le<int32_t>(p);
    case PlyType::kUint32:
      return read_le<uint32_t>(p);
    case PlyType::kFloat32:
      return read_le<float>(p);
    case PlyType::kFloat64:
      return read_le<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kFloat32;
  bool is_list = false;
  PlyType count_type = PlyType::kUint8;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> properties;
};

}  // namespace

TriMesh load_mesh(const std::filesystem::path& path, double unit_scale) {
  const std::string ext = lower_extension(path);
  if (ext == ".obj") return load_obj(path, unit_scale);
  if (ext == ".ply") return load_ply(path, unit_scale);
  fail(ErrorCode::kIoError, path.string() + ": unsupported mesh format");
}

TriMesh load_obj(const std::filesystem::path& path, double unit_scale) {
  std::istringstream in(read_file(path));
  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) fail(ErrorCode::kIoError, path.string() + ": bad vertex line");
      vertices.push_back(unit_scale * v);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      const int count = static_cast<int>(vertices.size());
      while (ls >> token) poly.push_back(obj_index(token, count, path));
      if (poly.size() < 3) fail(ErrorCode::kIoError, path.string() + ": face with fewer than 3 vertices");
      for (size_t k = 1; k + 1 < poly.size(); ++k) triangles.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  try {
    return TriMesh(std::move(vertices), std::move(triangles));
  } catch (const GraspError& e) {
    fail(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
}

TriMesh load_ply(const std::filesystem::path& path, double unit_scale) {
  const std::string data = read_file(path);
  const size_t header_end = data.find("end_header");
  if (data.rfind("ply", 0) != 0 || header_end == std::string::npos) {
    fail(ErrorCode::kIoError, path.string() + ": not a PLY file");
  }
  const size_t body = data.find('\n', header_end);
  if (body == std::string::npos) fail(ErrorCode::kIoError, path.string() + ": truncated PLY header");

  std::istringstream header(data.substr(0, header_end));
  std::vector<PlyElement> elements;
  std::string line;
  bool binary_le = false;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (tag == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) fail(ErrorCode::kIoError, path.string() + ": PLY property before element");
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.count_type = ply_type(count_type, path);
        p.type = ply_type(item_type, path);
      } else {
        ls >> p.name;
        p.type = ply_type(type, path);
      }
      elements.back().properties.push_back(p);
    }
  }
  if (!binary_le) fail(ErrorCode::kIoError, path.string() + ": only binary_little_endian PLY is supported");

  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;
  const char* cur = data.data() + body + 1;
  const char* end = data.data() + data.size();
  auto need = [&](size_t n) {
    if (static_cast<size_t>(end - cur) < n) fail(ErrorCode::kIoError, path.string() + ": truncated PLY body");
  };
  for (const PlyElement& e : elements) {
    for (size_t i = 0; i < e.count; ++i) {
      Vec3 v = Vec3::Zero();
      for (const PlyProperty& p : e.properties) {
        if (p.is_list) {
          need(ply_size(p.count_type));
          const auto n = static_cast<size_t>(read_ply_value(p.count_type, cur));
          cur += ply_size(p.count_type);
          need(n * ply_size(p.type));
          std::vector<int> poly(n);
          for (size_t k = 0; k < n; ++k, cur += ply_size(p.type)) poly[k] = static_cast<int>(read_ply_value(p.type, cur));
          if (e.name == "face" && (p.name == "vertex_indices" || p.name == "vertex_index")) {
            if (n < 3) fail(ErrorCode::kIoError, path.string() + ": face with fewer than 3 vertices");
            for (size_t k = 1; k + 1 < n; ++k) triangles.push_back({poly[0], poly[k], poly[k + 1]});
          }
          continue;
        }
        need(ply_size(p.type));
        const double value = read_ply_value(p.type, cur);
        cur += ply_size(p.type);
        if (e.name != "vertex") continue;
        if (p.name == "x") v.x() = value;
        if (p.name == "y") v.y() = value;
        if (p.name == "z") v.z() = value;
      }
      if (e.name == "vertex") vertices.push_back(unit_scale * v);
    }
  }
  try {
    return TriMesh(std::move(vertices), std::move(triangles));
  } catch (const GraspError& e) {
    fail(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".obj") return save_obj(mesh, path);
  if (ext == ".ply") return save_ply(mesh, path);
  fail(ErrorCode::kIoError, path.string() + ": unsupported mesh format");
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::string out;
  char buf[128];
  for (const Vec3& v : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out += buf;
  }
  for (const Tri& t : mesh.triangles()) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out += buf;
  }
  write_file(path, out);
}

void save_ply(const TriMesh& mesh, const std::filesystem::path& path) {
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(mesh.num_vertices()) +
                    "\nproperty double x\nproperty double y\nproperty double z\nelement face " +
                    std::to_string(mesh.num_triangles()) + "\nproperty list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : mesh.vertices()) {
    for (int a = 0; a < 3; ++a) append_le(out, v[a]);
  }
  for (const Tri& t : mesh.triangles()) {
    out.push_back(static_cast<char>(3));
    for (int idx : t) append_le(out, static_cast<int32_t>(idx));
  }
  write_file(path, out);
}

}  // namespace grasp
