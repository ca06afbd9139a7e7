#include <json.hpp>

#include "grasp/errors.hpp"
#include "grasp/io.hpp"
#include "io_util.hpp"

namespace grasp {
namespace {

constexpr const char* kRigSchema = "grasp-rig/1";

struct ArrayWriter {
  std::string bytes;
  nlohmann::ordered_json index = nlohmann::ordered_json::object();

  void add(const std::string& name, const std::vector<double>& values) {
    index[name] = {{"offset", bytes.size() / sizeof(float)}, {"count", values.size()}};
    for (double v : values) append_le(bytes, static_cast<float>(v));
  }
};

std::vector<double> flatten(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

std::vector<double> flatten(const std::vector<Vec3>& pts) {
  std::vector<double> out;
  for (const Vec3& p : pts) out.insert(out.end(), {p.x(), p.y(), p.z()});
  return out;
}

}  // namespace

void save_rig(const HandRig& rig, const std::filesystem::path& path) {
  ArrayWriter arrays;
  arrays.add("vertices", flatten(rig.rest_mesh().vertices()));
  arrays.add("joints", flatten(rig.rest_joints()));
  arrays.add("weights", flatten(rig.weights()));
  std::vector<double> vdirs, jdirs;
  for (const Eigen::MatrixXd& d : rig.vertex_shape_dirs()) {
    const auto f = flatten(d);
    vdirs.insert(vdirs.end(), f.begin(), f.end());
  }
  for (const Eigen::MatrixXd& d : rig.joint_shape_dirs()) {
    const auto f = flatten(d);
    jdirs.insert(jdirs.end(), f.begin(), f.end());
  }
  arrays.add("vertex_shape_dirs", vdirs);
  arrays.add("joint_shape_dirs", jdirs);

  std::filesystem::path bin = path;
  bin.replace_extension(".bin");
  nlohmann::ordered_json header;
  header["schema"] = kRigSchema;
  header["binary"] = bin.filename().string();
  header["right_hand"] = rig.right_hand();
  header["num_vertices"] = rig.num_vertices();
  header["parents"] = rig.parents();
  nlohmann::ordered_json tris = nlohmann::ordered_json::array();
  for (const Tri& t : rig.rest_mesh().triangles()) tris.push_back({t[0], t[1], t[2]});
  header["triangles"] = tris;
  header["contact_sites"] = rig.contact_sites();
  header["arrays"] = arrays.index;
  write_file(bin, arrays.bytes);
  write_file(path, header.dump(1) + "\n");
}

HandRig load_rig(const std::filesystem::path& path) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
  try {
    if (header.at("schema").get<std::string>() != kRigSchema) {
      fail(ErrorCode::kIoError, path.string() + ": unsupported rig schema");
    }
    const std::string bytes = read_file(path.parent_path() / header.at("binary").get<std::string>());
    const size_t nv = header.at("num_vertices").get<size_t>();

    auto array = [&](const std::string& name, size_t expected) {
      const auto& entry = header.at("arrays").at(name);
      const size_t offset = entry.at("offset").get<size_t>();
      const size_t count = entry.at("count").get<size_t>();
      if (count != expected || (offset + count) * sizeof(float) > bytes.size()) {
        fail(ErrorCode::kIoError, path.string() + ": rig array '" + name + "' has the wrong size");
      }
      std::vector<double> out(count);
      for (size_t i = 0; i < count; ++i) {
        float f;
        std::memcpy(&f, bytes.data() + (offset + i) * sizeof(float), sizeof(float));
        if constexpr (std::endian::native == std::endian::big) f = byteswap_value(f);
        out[i] = f;
      }
      return out;
    };
    auto points = [](const std::vector<double>& flat) {
      std::vector<Vec3> out;
      for (size_t i = 0; i + 2 < flat.size(); i += 3) out.emplace_back(flat[i], flat[i + 1], flat[i + 2]);
      return out;
    };
    auto matrix = [](const double* flat, Eigen::Index rows, Eigen::Index cols) {
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
      }
      return m;
    };

    const auto n = static_cast<Eigen::Index>(nv);
    std::vector<Tri> tris;
    for (const auto& t : header.at("triangles")) tris.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    TriMesh rest(points(array("vertices", 3 * nv)), std::move(tris));
    const auto weights_flat = array("weights", nv * kNumJoints);
    Eigen::MatrixXd weights = matrix(weights_flat.data(), n, kNumJoints);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double sum = weights.row(r).sum();
      if (sum > 0.0) weights.row(r) /= sum;
    }
    const auto vdirs = array("vertex_shape_dirs", kNumShapeParams * nv * 3);
    const auto jdirs = array("joint_shape_dirs", kNumShapeParams * kNumJoints * 3);
    std::vector<Eigen::MatrixXd> vertex_dirs, joint_dirs;
    for (int s = 0; s < kNumShapeParams; ++s) {
      vertex_dirs.push_back(matrix(vdirs.data() + s * nv * 3, n, 3));
      joint_dirs.push_back(matrix(jdirs.data() + s * kNumJoints * 3, kNumJoints, 3));
    }
    return HandRig(std::move(rest), header.at("parents").get<std::array<int, kNumJoints>>(),
                   points(array("joints", kNumJoints * 3)), std::move(weights), std::move(vertex_dirs),
                   std::move(joint_dirs), header.at("contact_sites").get<std::map<std::string, std::vector<int>>>(),
                   header.at("right_hand").get<bool>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
}

}  // namespace grasp
