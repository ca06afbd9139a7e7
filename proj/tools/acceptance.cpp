#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grasp/align.hpp"
#include "grasp/contact.hpp"
#include "grasp/hull.hpp"
#include "grasp/metrics.hpp"
#include "grasp/primitives.hpp"
#include "grasp/sdf.hpp"
#include "grasp/synth.hpp"
#include "grasp/toy_grasp.hpp"

namespace fs = std::filesystem;
using namespace grasp;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const HandRig& rig() {
  static const HandRig r = builtin_capsule_hand();
  return r;
}

Outcome ipi_parity() {
  Outcome o;
  const double full = ipi(0.176, 0.0092);
  const double no_dis = ipi(0.051, 0.0001);
  const double full_r = std::round(full * 1000.0) / 1000.0;
  const double no_dis_r = std::round(no_dis * 1000.0) / 1000.0;
  o.check(full_r == 0.175, fmt("ipi(0.176, 0.0092) = %.6f rounds to %.3f, want 0.175", full, full_r));
  o.check(no_dis_r == 0.051, fmt("ipi(0.051, 0.0001) = %.6f rounds to %.3f, want 0.051", no_dis, no_dis_r));
  return o;
}

Outcome silhouette_invariance() {
  Outcome o;
  const std::vector<std::pair<PrimitiveKind, Vec3>> kinds = {{PrimitiveKind::kBox, Vec3(0.08, 0.05, 0.03)},
                                                             {PrimitiveKind::kSphere, Vec3::Constant(0.04)},
                                                             {PrimitiveKind::kCylinder, Vec3(0.03, 0.1, 0.0)},
                                                             {PrimitiveKind::kLatheMug, Vec3(0.04, 0.09, 0.005)}};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const CameraIntrinsics camera;
  double worst = 0.0;
  for (uint64_t scene = 0; scene < 10; ++scene) {
    const auto& [kind, dims] = kinds[scene % kinds.size()];
    ObjectPose pose;
    pose.rigid = RigidTransform::from_axis_angle(Vec3(u(rng), u(rng), u(rng)) * std::numbers::pi,
                                                 Vec3(0.05 * u(rng), 0.05 * u(rng), 0.5 + 0.2 * u(rng)));
    const TriMesh object = make_primitive(kind, dims);
    const TriMesh placed = pose.apply(object);
    const auto mask_pts = mask_foreground_points(rasterize_mask(object, pose, camera));
    const CandidateSet set = generate_candidates(placed, candidate_distances(placed.centroid().norm()));
    auto loss = [&](const TriMesh& m) {
      const auto pts = positions(sample_surface(m, 1000, scene));
      return chamfer_2d(project_points(pts, RigidTransform(), camera), mask_pts).normalized();
    };
    const double reference = loss(placed);
    for (const Candidate& c : set.items) worst = std::max(worst, std::abs(loss(c.mesh) / reference - 1.0));
  }
  o.check(worst <= 1e-6, fmt("max relative change %.3g over 10 scenes x 32 candidates, want <= 1e-6", worst));
  return o;
}

Outcome opa_round_trip() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::future<std::pair<double, double>>> jobs;
  for (uint64_t scene = 0; scene < 20; ++scene) {
    SyntheticSpec spec;
    spec.kind = PrimitiveKind::kBox;
    spec.dimensions = Vec3(0.07 + 0.03 * u(rng), 0.045 + 0.02 * u(rng), 0.025 + 0.015 * u(rng));
    spec.rotation = Vec3(2 * u(rng) - 1, 2 * u(rng) - 1, 2 * u(rng) - 1) * std::numbers::pi;
    spec.translation = Vec3(0.04 * (u(rng) - 0.5), 0.04 * (u(rng) - 0.5), 0.45 + 0.1 * u(rng));
    spec.rotation_deg = 5.0 + 10.0 * u(rng);
    spec.translation_m = 0.01 + 0.02 * u(rng);
    spec.seed = scene;
    jobs.push_back(std::async(std::launch::async, [spec] {
      const GraspScene s = synth_scene(spec);
      const ObjectPose& truth = *s.ground_truth;
      OpaConfig cfg;
      cfg.seed = spec.seed;
      const double depth = truth.apply(s.object.centroid()).z();
      const OpaResult r = optimize_object_pose(s.object, s.mask, s.camera, s.object_to_camera, cfg, depth);
      const auto pts = positions(farthest_point_sample(s.object, 1000, 0));
      const double gap = mean_nearest_distance(project_points(pts, r.pose, s.camera).visible_points(),
                                               mask_foreground_points(s.mask));
      return std::make_pair(gap, geodesic_angle(r.pose.rigid.rotation(), truth.rigid.rotation()) / kDeg);
    }));
  }
  int good = 0;
  std::string per_scene;
  for (auto& j : jobs) {
    const auto [gap, angle] = j.get();
    good += gap <= 2.0 && angle <= 5.0;
    per_scene += fmt(" %.2f/%.1f", gap, angle);
  }
  o.check(good >= 18, fmt("%d/20 scenes within 2 px and 5 deg, want >= 18 (px/deg:%s)", good, per_scene.c_str()));
  return o;
}

double relative_error(const DofVector& analytic, const DofVector& numeric) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-8);
}

// The mesh SDF is piecewise smooth; the step stays well inside its smooth
// pieces while rounding error remains near 1e-11.
Outcome gradient_fidelity() {
  Outcome o;
  const double h = 1e-7;
  std::array<double, 5> worst{};
  std::vector<std::future<std::array<double, 5>>> jobs;
  for (uint64_t config = 0; config < 50; ++config) {
    jobs.push_back(std::async(std::launch::async, [config, h] {
      ToyGraspSpec spec;
      spec.seed = config;
      ToyGrasp toy = toy_sphere_grasp(rig(), spec);
      std::mt19937_64 rng(config);
      std::normal_distribution<double> n(0.0, 1.0);
      HandParams p = toy.truth;
      for (int i = 0; i < 3; ++i) p.global_pose[i] += 0.02 * n(rng);
      for (int i = 3; i < 6; ++i) p.global_pose[i] += 0.004 * n(rng);
      for (int i = 0; i < kNumPoseParams; ++i) p.joint_pose[i] += 0.1 * n(rng);
      for (int i = 0; i < kNumPoseParams; ++i) toy.problem.reference[i] += 0.05 * n(rng);
      const ContactEnergy energy(toy.problem, ContactConfig{});
      const EnergyGradient g = energy.evaluate_with_gradient(p);
      std::array<DofVector, 5> fd;
      for (int k = 0; k < kNumHandDofs; ++k) {
        DofVector d = p.dofs();
        HandParams plus = p, minus = p;
        d[k] += h;
        plus.set_dofs(d);
        d[k] -= 2 * h;
        minus.set_dofs(d);
        const EnergyBreakdown a = energy.evaluate(plus), b = energy.evaluate(minus);
        fd[0][k] = (a.l_dis - b.l_dis) / (2 * h);
        fd[1][k] = (a.l_pen - b.l_pen) / (2 * h);
        fd[2][k] = (a.l_spen - b.l_spen) / (2 * h);
        fd[3][k] = (a.l_sup - b.l_sup) / (2 * h);
        fd[4][k] = (a.total - b.total) / (2 * h);
      }
      return std::array<double, 5>{relative_error(g.dis, fd[0]), relative_error(g.pen, fd[1]),
                                   relative_error(g.spen, fd[2]), relative_error(g.sup, fd[3]),
                                   relative_error(g.total, fd[4])};
    }));
  }
  for (auto& j : jobs) {
    const auto e = j.get();
    for (size_t t = 0; t < 5; ++t) worst[t] = std::max(worst[t], e[t]);
  }
  const char* names[] = {"L_dis", "L_pen", "L_spen", "L_sup", "total"};
  for (size_t t = 0; t < 5; ++t) {
    o.check(worst[t] <= 1e-3, fmt("%s worst %.2e over 50 configs x %d dofs", names[t], worst[t], kNumHandDofs));
  }
  return o;
}

struct GraspMetrics {
  double mean_sdf = 0.0;
  double siv = 0.0;
  double cr = 0.0;
  double sd = 0.0;
};

GraspMetrics grasp_metrics(const ToyGrasp& toy, const HandParams& params, bool with_sd) {
  GraspMetrics m;
  const MeshSdf sdf(toy.problem.object);
  const auto contacts = positions(contact_points(rig(), params, toy.problem.contacts));
  for (const Vec3& p : contacts) m.mean_sdf += std::abs(sdf.value(p));
  m.mean_sdf /= static_cast<double>(contacts.size());
  m.cr = contact_ratio(contacts, sdf);
  const TriMesh hand = pose_hand(rig(), params);
  m.siv = solid_intersection_volume(hand, toy.problem.object);
  if (with_sd) m.sd = simulation_displacement(hand, toy.problem.object);
  return m;
}

Outcome toy_refinement() {
  Outcome o;
  const ToyGrasp toy = toy_sphere_grasp(rig(), ToyGraspSpec{});
  const RefineResult r = refine_grasp(toy.problem, ContactConfig{});
  const GraspMetrics m = grasp_metrics(toy, r.params, false);
  const double initial = r.trace.front().total, final = r.trace[static_cast<size_t>(r.best_iteration)].total;
  o.check(m.mean_sdf <= 0.002, fmt("mean |SDF| at contacts %.3f mm, want <= 2", 1e3 * m.mean_sdf));
  o.check(m.siv <= 0.5, fmt("SIV %.3f cm3, want <= 0.5", m.siv));
  o.check(m.cr >= 0.8, fmt("CR %.3f, want >= 0.8", m.cr));
  o.check(final <= initial, fmt("energy %.4g -> %.4g", initial, final));
  return o;
}

Outcome ablation_directions() {
  Outcome o;
  struct Row {
    GraspMetrics full, no_dis, no_pen, no_contact;
  };
  std::vector<std::future<Row>> jobs;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    jobs.push_back(std::async(std::launch::async, [seed] {
      ToyGraspSpec spec;
      spec.seed = seed;
      const ToyGrasp toy = toy_sphere_grasp(rig(), spec);
      ContactConfig full, no_dis, no_pen;
      no_dis.use_dis = false;
      no_pen.use_pen = false;
      Row row;
      row.full = grasp_metrics(toy, refine_grasp(toy.problem, full).params, true);
      row.no_dis = grasp_metrics(toy, refine_grasp(toy.problem, no_dis).params, false);
      row.no_pen = grasp_metrics(toy, refine_grasp(toy.problem, no_pen).params, false);
      row.no_contact = grasp_metrics(toy, toy.problem.init, true);
      return row;
    }));
  }
  std::vector<double> cr_full, cr_no_dis, siv_full, siv_no_pen, sd_full, sd_no_contact;
  for (auto& j : jobs) {
    const Row r = j.get();
    cr_full.push_back(r.full.cr);
    cr_no_dis.push_back(r.no_dis.cr);
    siv_full.push_back(r.full.siv);
    siv_no_pen.push_back(r.no_pen.siv);
    sd_full.push_back(r.full.sd);
    sd_no_contact.push_back(r.no_contact.sd);
  }
  const double a = median(cr_no_dis), b = median(cr_full);
  const double c = median(siv_no_pen), d = median(siv_full);
  const double e = median(sd_no_contact), f = median(sd_full);
  o.check(a < b, fmt("median CR w/o L_dis %.3f < full %.3f", a, b));
  o.check(c > d, fmt("median SIV w/o L_pen %.3f > full %.3f cm3", c, d));
  o.check(e > f, fmt("median SD w/o contact %.1f > full %.1f cm", e, f));
  return o;
}

Outcome geometry_oracles() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.8, 1.8);
  const int subdiv = 4;
  const TriMesh sphere = make_icosphere(1.0, subdiv);
  const MeshSdf sphere_sdf(sphere);
  const double chordal = icosphere_chordal_error(1.0, subdiv);
  double sphere_err = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Vec3 q(u(rng), u(rng), u(rng));
    sphere_err = std::max(sphere_err, std::abs(sphere_sdf.value(q) - (q.norm() - 1.0)));
  }
  o.check(sphere_err <= chordal + 1e-6,
          fmt("sphere SDF error %.3g, want <= %.3g", sphere_err, chordal + 1e-6));

  const MeshSdf box_sdf(make_box(Vec3::Ones(), 3));
  double box_err = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Vec3 q = Vec3(u(rng), u(rng), u(rng)) / 1.8;
    const Vec3 d = q.cwiseAbs() - Vec3::Constant(0.5);
    const double oracle = d.cwiseMax(0.0).norm() + std::min(d.maxCoeff(), 0.0);
    box_err = std::max(box_err, std::abs(box_sdf.value(q) - oracle));
  }
  o.check(box_err <= 1e-6, fmt("box SDF error %.3g, want <= 1e-6", box_err));

  std::vector<Vec3> corners;
  for (int i = 0; i < 8; ++i) corners.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  const double hull = convex_hull_volume(corners);
  o.check(std::abs(hull - 1.0) <= 1e-9, fmt("unit cube hull volume %.12f", hull));

  const TriMesh cube = make_box(Vec3::Ones());
  const double siv = solid_intersection_volume(cube, cube.translated(Vec3(0.9, 0.9, 0.9)), 0.0025);
  o.check(std::abs(siv - 1000.0) <= 20.0, fmt("corner overlap SIV %.2f cm3, want 1000 +- 2%%", siv));

  const TriMesh ball = make_icosphere(0.05, 3);
  const double f5 = fscore(ball, ball, 5.0), f10 = fscore(ball, ball, 10.0);
  o.check(std::abs(f5 - 1.0) <= 1e-3 && std::abs(f10 - 1.0) <= 1e-3, fmt("identity F5 %.4f F10 %.4f", f5, f10));
  const TriMesh quad = make_quad(0.5, 0.5, 0.0);
  const double far = fscore(quad.translated(Vec3(0, 0, 0.02)), quad, 5.0);
  o.check(far == 0.0, fmt("F5 at 20 mm displacement %.4f", far));
  const TriMesh unit = make_box(Vec3::Ones(), 4);
  const double cd_id = chamfer_3d(unit, unit);
  o.check(cd_id < 0.1, fmt("identity CD %.4f mm, want < 0.1", cd_id));
  const double cd_planes = chamfer_3d(quad, quad.translated(Vec3(0, 0, 0.01)));
  o.check(std::abs(cd_planes - 10.0) <= 0.1, fmt("parallel squares CD %.4f mm, want 10 +- 1%%", cd_planes));
  const TriMesh shifted = make_icosphere(0.4, 3).translated(Vec3(0.05, 0, 0));
  o.check(chamfer_3d(unit, shifted) == chamfer_3d(shifted, unit), "CD symmetric");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Outcome run_determinism(const std::string& cli) {
  Outcome o;
  if (cli.empty()) {
    o.check(false, "needs --cli");
    return o;
  }
  const fs::path dir = fs::temp_directory_path() / "grasp_acceptance_determinism";
  fs::remove_all(dir);
  const std::string quiet = " > /dev/null";
  const std::string scene = (dir / "in" / "scene.json").string();
  int rc = std::system((cli + " synth --kind box --dims 0.08,0.05,0.03 --seed 8 -o " + (dir / "in").string() + quiet)
                           .c_str());
  o.check(rc == 0, "synth exit 0");
  for (const char* run : {"a", "b"}) {
    rc = std::system((cli + " run " + scene + " -o " + (dir / run).string() + quiet).c_str());
    o.check(rc == 0, std::string("run ") + run + " exit 0");
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir / "a")) files.push_back(entry.path().filename().string());
  std::sort(files.begin(), files.end());
  for (const auto& entry : fs::directory_iterator(dir / "b")) {
    const std::string f = entry.path().filename().string();
    o.check(std::binary_search(files.begin(), files.end(), f), f + " written by both runs");
  }
  for (const std::string& f : files) o.check(slurp(dir / "a" / f) == slurp(dir / "b" / f), f + " identical");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria; prints one PASS/FAIL line per criterion"};
  std::vector<int> only;
  std::string cli;
  app.add_option("-n,--criterion", only, "Criteria to run (default all)")->check(CLI::Range(1, 8));
  app.add_option("--cli", cli, "Path to the grasp executable");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "ipi table parity", 0.001, ipi_parity},
      {2, "silhouette invariance across candidates", 10, silhouette_invariance},
      {3, "object pose round trip", 300, opa_round_trip},
      {4, "contact energy gradients", 120, gradient_fidelity},
      {5, "toy grasp refinement", 120, toy_refinement},
      {6, "ablation directions", 1200, ablation_directions},
      {7, "geometry oracles", 60, geometry_oracles},
      {8, "run determinism", 60, [&] { return run_determinism(cli); }},
  };

  bool all = true;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(secs < c.limit_s, fmt("%.3f s, limit %g s", secs, c.limit_s));
    all = all && o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
