#ifndef GRASP_ERRORS_HPP
#define GRASP_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace grasp {

enum class ErrorCode {
  kInvalidMesh,
  kSignRequiresWatertight,
  kSampleBudgetExceeded,
  kDegenerateHull,
  kGridTooLarge,
  kNoVisiblePoints,
  kEmptyMask,
  kEmptyContactSet,
  kInvalidParams,
  kInvalidBox,
  kObjectOutsideFrustum,
  kDivergedOptimization,
  kObjectAtCameraOrigin,
  kSimulationDiverged,
  kSceneParseError,
  kMissingAsset,
  kStageOrderError,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// callers (the CLI in particular) can map them to exit statuses.
class GraspError : public std::runtime_error {
 public:
  GraspError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Scene-file schema errors name the offending field path, e.g. "camera.fx".
class SceneParseError : public GraspError {
 public:
  explicit SceneParseError(std::string field_path, const std::string& detail = "")
      : GraspError(ErrorCode::kSceneParseError,
                   detail.empty() ? field_path : field_path + " (" + detail + ")"),
        field_path_(std::move(field_path)) {}

  const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw GraspError(code, what);
}

}  // namespace grasp

#endif  // GRASP_ERRORS_HPP
