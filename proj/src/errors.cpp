#include "grasp/errors.hpp"

namespace grasp {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidMesh: return "InvalidMesh";
    case ErrorCode::kSignRequiresWatertight: return "SignRequiresWatertight";
    case ErrorCode::kSampleBudgetExceeded: return "SampleBudgetExceeded";
    case ErrorCode::kDegenerateHull: return "DegenerateHull";
    case ErrorCode::kGridTooLarge: return "GridTooLarge";
    case ErrorCode::kNoVisiblePoints: return "NoVisiblePoints";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kEmptyContactSet: return "EmptyContactSet";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kInvalidBox: return "InvalidBox";
    case ErrorCode::kObjectOutsideFrustum: return "ObjectOutsideFrustum";
    case ErrorCode::kDivergedOptimization: return "DivergedOptimization";
    case ErrorCode::kObjectAtCameraOrigin: return "ObjectAtCameraOrigin";
    case ErrorCode::kSimulationDiverged: return "SimulationDiverged";
    case ErrorCode::kSceneParseError: return "SceneParseError";
    case ErrorCode::kMissingAsset: return "MissingAsset";
    case ErrorCode::kStageOrderError: return "StageOrderError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace grasp
