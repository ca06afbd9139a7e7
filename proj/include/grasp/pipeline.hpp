#ifndef GRASP_PIPELINE_HPP
#define GRASP_PIPELINE_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "grasp/align.hpp"
#include "grasp/contact.hpp"
#include "grasp/metrics.hpp"
#include "grasp/scene.hpp"

namespace grasp {

enum class Stage { kAlign = 0, kOpa = 1, kSelect = 2, kRefine = 3 };

inline constexpr std::array<Stage, 4> kAllStages = {Stage::kAlign, Stage::kOpa, Stage::kSelect, Stage::kRefine};

std::string_view stage_name(Stage stage);
// Throws InvalidParams on unknown names.
Stage parse_stage(std::string_view name);

struct CandidateConfig {
  int count = 32;
  double lo = 0.25;  // times the current center distance
  double hi = 4.0;
};

struct EvalConfig {
  size_t samples = kDefaultMetricSamples;
  double tau = kDefaultContactTau;
  double siv_voxel = kDefaultSivVoxel;
  SimulationConfig simulation;
  uint64_t seed = 0;
};

struct PipelineConfig {
  OpaConfig opa;
  CandidateConfig candidates;
  ContactConfig contact;
  EvalConfig eval;

  // Every field, grouped as {"opa": {...}, "candidates": {...}, ...}.
  nlohmann::ordered_json to_json() const;
  // Missing keys keep their defaults; unknown keys throw InvalidParams.
  static PipelineConfig from_json(const nlohmann::json& j);
  // Dotted-key override such as "opa.iterations=50". The value must match
  // the type of the field it replaces. Throws InvalidParams.
  void set(std::string_view assignment);
  // Throws InvalidParams.
  void validate() const;
};

struct PipelineResult {
  GraspScene scene;
  std::optional<double> align_scale;  // k_scale relative to the incoming scale
  std::optional<OpaResult> opa;
  std::optional<CandidateSet> candidates;
  size_t selected = 0;
  std::optional<RefineResult> refine;
};

// Runs the requested stages in the order align, opa, select, refine. The
// request must be strictly increasing in that order and may not start before
// the last stage already recorded in the scene's provenance; otherwise
// StageOrderError. Each stage appends its full configuration and its result
// to the provenance log.
PipelineResult run_pipeline(const GraspScene& scene, std::span<const Stage> stages, const PipelineConfig& cfg);

// F-scores and CD need the scene's ground-truth pose and are NaN without it.
MetricReport evaluate_scene(const GraspScene& scene, const EvalConfig& cfg);

// CSV with a header row and LF line endings; values use 17 significant digits.
std::string opa_trace_csv(const OpaResult& result);
std::string contact_trace_csv(const RefineResult& result);
std::string candidates_csv(const CandidateSet& candidates, size_t selected);

}  // namespace grasp

#endif  // GRASP_PIPELINE_HPP
