#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grasp/errors.hpp"
#include "grasp/io.hpp"
#include "grasp/pipeline.hpp"
#include "grasp/scene.hpp"
#include "grasp/synth.hpp"

namespace fs = std::filesystem;
using namespace grasp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitDiverged = 3;

int exit_code(const GraspError& e) {
  return e.code() == ErrorCode::kDivergedOptimization || e.code() == ErrorCode::kSimulationDiverged ? kExitDiverged
                                                                                                     : kExitInvalid;
}

struct JobOutcome {
  int code = kExitOk;
  std::string message;
};

// One scene per worker; GRASP_REFINE_THREADS caps the worker count.
template <typename F>
std::vector<JobOutcome> run_jobs(size_t count, F&& job) {
  size_t workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GRASP_REFINE_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) workers = std::min(workers, static_cast<size_t>(cap));
  }
  workers = std::min(workers, count);
  std::vector<JobOutcome> out(count);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < count; i = next++) {
      try {
        out[i].message = job(i);
      } catch (const GraspError& e) {
        out[i] = {exit_code(e), e.what()};
      } catch (const std::exception& e) {
        out[i] = {kExitInvalid, e.what()};
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return out;
}

int report(const std::vector<std::string>& inputs, const std::vector<JobOutcome>& outcomes) {
  int code = kExitOk;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].code != kExitOk) {
      std::cerr << inputs[i] << ": " << outcomes[i].message << "\n";
    } else if (!outcomes[i].message.empty()) {
      std::cout << outcomes[i].message;
    }
    code = std::max(code, outcomes[i].code);
  }
  return code;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
}

PipelineConfig build_config(const std::string& config_path, const std::vector<std::string>& overrides) {
  PipelineConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) fail(ErrorCode::kMissingAsset, config_path);
    try {
      cfg = PipelineConfig::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kInvalidParams, config_path + ": " + e.what());
    }
  }
  for (const std::string& o : overrides) cfg.set(o);
  cfg.validate();
  return cfg;
}

Vec3 parse_vec3(const std::vector<double>& v, const char* flag) {
  if (v.size() == 1) return Vec3::Constant(v[0]);
  if (v.size() != 3) fail(ErrorCode::kInvalidParams, std::string(flag) + " takes 1 or 3 values");
  return Vec3(v[0], v[1], v[2]);
}

std::string metric_cell(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

struct PipelineArgs {
  std::vector<std::string> scenes;
  std::string out;
  std::string config;
  std::vector<std::string> overrides;
  std::vector<std::string> stages;
};

void add_pipeline_options(CLI::App* cmd, PipelineArgs& a, bool with_stages) {
  cmd->add_option("scenes", a.scenes, "Scene files")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", a.out, "Output folder (one subfolder per scene when several)")->required();
  cmd->add_option("-c,--config", a.config, "JSON config file");
  cmd->add_option("--set", a.overrides, "Config override key=value, e.g. opa.iterations=50");
  if (with_stages) {
    cmd->add_option("--stages", a.stages, "Subset of align,opa,select,refine")->delimiter(',');
  }
}

int run_stages(const PipelineArgs& a, std::vector<Stage> stages) {
  const PipelineConfig cfg = build_config(a.config, a.overrides);
  if (!a.stages.empty()) {
    stages.clear();
    for (const std::string& s : a.stages) stages.push_back(parse_stage(s));
  }
  const auto outcomes = run_jobs(a.scenes.size(), [&](size_t i) {
    const fs::path dir = a.scenes.size() == 1 ? fs::path(a.out) : fs::path(a.out) / std::to_string(i);
    const GraspScene scene = load_scene(a.scenes[i]);
    const PipelineResult r = run_pipeline(scene, stages, cfg);
    fs::create_directories(dir);
    save_scene(r.scene, dir / "scene.json");
    if (r.opa) write_text(dir / "opa_trace.csv", opa_trace_csv(*r.opa));
    if (r.candidates) write_text(dir / "candidates.csv", candidates_csv(*r.candidates, r.selected));
    if (r.refine) write_text(dir / "contact_trace.csv", contact_trace_csv(*r.refine));
    return (dir / "scene.json").string() + "\n";
  });
  return report(a.scenes, outcomes);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hand-object grasp refinement: scale alignment, object pose fitting, candidate selection and "
               "contact optimization"};
  app.require_subcommand(1);

  SyntheticSpec spec;
  std::string kind = "sphere", synth_out;
  std::vector<double> dims{0.04}, rotation{0, 0, 0}, translation{0, 0, 0.5};
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic scene with ground truth");
  synth->add_option("--kind", kind, "sphere, box, cylinder or lathe-mug")->capture_default_str();
  synth->add_option("--dims", dims, "Primitive dimensions in meters")->delimiter(',');
  synth->add_option("--rotation", rotation, "True rotation, axis-angle")->delimiter(',');
  synth->add_option("--translation", translation, "True translation in meters")->delimiter(',');
  synth->add_option("--rot-deg", spec.rotation_deg, "Rotation perturbation in degrees")->capture_default_str();
  synth->add_option("--trans-m", spec.translation_m, "Translation perturbation in meters")->capture_default_str();
  synth->add_option("--scale", spec.scale_factor, "Scale perturbation factor")->capture_default_str();
  synth->add_option("--seed", spec.seed, "Seed")->capture_default_str();
  synth->add_option("-o,--out", synth_out, "Output folder")->required();

  PipelineArgs align_args, opa_args, select_args, refine_args, run_args;
  add_pipeline_options(app.add_subcommand("align", "Initial scale alignment and placement"), align_args, false);
  add_pipeline_options(app.add_subcommand("opa", "Fit the object pose to the mask"), opa_args, false);
  add_pipeline_options(app.add_subcommand("select", "Pick the distance candidate nearest the contacts"), select_args,
                       false);
  add_pipeline_options(app.add_subcommand("refine", "Contact optimization of the hand"), refine_args, false);
  add_pipeline_options(app.add_subcommand("run", "All stages in order"), run_args, true);

  std::vector<std::string> eval_scenes;
  std::string eval_config;
  std::vector<std::string> eval_overrides;
  bool eval_json = false;
  CLI::App* eval = app.add_subcommand("eval", "Print F5, F10, CD, SIV, SD, IPI and CR");
  eval->add_option("scenes", eval_scenes, "Scene files")->required()->check(CLI::ExistingFile);
  eval->add_option("-c,--config", eval_config, "JSON config file");
  eval->add_option("--set", eval_overrides, "Config override key=value, e.g. eval.simulation.duration=0.5");
  eval->add_flag("--json", eval_json, "One JSON object per scene");

  CLI::App* config = app.add_subcommand("config", "Print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*config) {
      std::cout << PipelineConfig{}.to_json().dump(2) << "\n";
      return kExitOk;
    }
    if (*synth) {
      spec.kind = parse_primitive(kind);
      spec.dimensions = parse_vec3(dims, "--dims");
      spec.rotation = parse_vec3(rotation, "--rotation");
      spec.translation = parse_vec3(translation, "--translation");
      const GraspScene scene = synth_scene(spec);
      fs::create_directories(synth_out);
      save_scene(scene, fs::path(synth_out) / "scene.json");
      std::cout << (fs::path(synth_out) / "scene.json").string() << "\n";
      return kExitOk;
    }
    if (*app.get_subcommand("align")) return run_stages(align_args, {Stage::kAlign});
    if (*app.get_subcommand("opa")) return run_stages(opa_args, {Stage::kOpa});
    if (*app.get_subcommand("select")) return run_stages(select_args, {Stage::kSelect});
    if (*app.get_subcommand("refine")) return run_stages(refine_args, {Stage::kRefine});
    if (*app.get_subcommand("run")) {
      return run_stages(run_args, std::vector<Stage>(kAllStages.begin(), kAllStages.end()));
    }
    if (*eval) {
      const PipelineConfig cfg = build_config(eval_config, eval_overrides);
      std::vector<MetricReport> reports(eval_scenes.size());
      const auto outcomes = run_jobs(eval_scenes.size(), [&](size_t i) {
        reports[i] = evaluate_scene(load_scene(eval_scenes[i]), cfg.eval);
        return std::string();
      });
      std::ostringstream table;
      if (eval_json) {
        for (size_t i = 0; i < reports.size(); ++i) {
          if (outcomes[i].code == kExitOk) table << reports[i].to_json() << "\n";
        }
      } else {
        char line[256];
        std::snprintf(line, sizeof line, "%-32s %8s %8s %10s %10s %10s %8s %8s\n", "scene", "F5", "F10", "CD(mm)",
                      "SIV(cm3)", "SD(cm)", "IPI", "CR");
        table << line;
        for (size_t i = 0; i < reports.size(); ++i) {
          if (outcomes[i].code != kExitOk) continue;
          const MetricReport& m = reports[i];
          std::snprintf(line, sizeof line, "%-32s %8s %8s %10s %10s %10s %8s %8s\n", eval_scenes[i].c_str(),
                        metric_cell(m.f5).c_str(), metric_cell(m.f10).c_str(), metric_cell(m.cd).c_str(),
                        metric_cell(m.siv).c_str(), metric_cell(m.sd).c_str(), metric_cell(m.ipi).c_str(),
                        metric_cell(m.cr).c_str());
          table << line;
        }
      }
      std::cout << table.str();
      return report(eval_scenes, outcomes);
    }
  } catch (const GraspError& e) {
    std::cerr << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}
