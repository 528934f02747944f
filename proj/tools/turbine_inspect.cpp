// Command-line front end: turbine mesh generation, inspection planning,
// closed-loop simulation and controller comparison.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "wti/config.hpp"
#include "wti/errors.hpp"

namespace fs = std::filesystem;
using namespace wti;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPlanning = 3;
constexpr int kExitSolver = 4;
constexpr int kExitIo = 5;

int verbosity() {
  const char* env = std::getenv("TURBINE_INSPECT_LOG");
  if (env == nullptr) return 1;
  const std::string v(env);
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void info(const std::string& msg) {
  if (verbosity() >= 1) std::cerr << msg << "\n";
}

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::string preset = "sim-full-scale";
  unsigned seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON configuration file");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--preset", opts.preset,
                  "configuration preset (sim-full-scale | lab-small-scale)");
  cmd->add_option("--seed", opts.seed, "random seed (echoed into outputs)")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
}

sim::ScenarioConfig resolve_config(const CommonOptions& opts) {
  sim::ScenarioConfig cfg = config::preset(opts.preset);
  if (!opts.config_path.empty()) cfg = config::load_config(opts.config_path, cfg);
  if (opts.seed_set) cfg.seed = opts.seed;
  return cfg;
}

fs::path prepare_out_dir(const CommonOptions& opts) {
  fs::path dir(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + opts.out_dir + "'");
  return dir;
}

void write_series(const metrics::TrajectoryLog& log, const fs::path& path,
                  double metrics::LogRecord::* field, const char* header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "'");
  out << "t," << header << "\n";
  char buf[64];
  for (const auto& rec : log.records) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.12g\n", rec.t, rec.*field);
    out << buf;
  }
}

int cmd_mesh(const CommonOptions& opts, int subdivisions) {
  sim::ScenarioConfig cfg = resolve_config(opts);
  if (subdivisions > 0) cfg.turbine.face_subdivisions = subdivisions;
  const auto dir = prepare_out_dir(opts);

  const auto mesh = geometry::generate_turbine_mesh(cfg.turbine);
  const auto clusters = planner::cluster_surfaces(mesh);
  geometry::export_mesh(mesh, (dir / "turbine_mesh.obj").string());
  config::save_config(cfg, (dir / "effective_config.json").string());

  std::ofstream summary(dir / "mesh_summary.txt");
  if (!summary) throw IoError("cannot open mesh summary file");
  summary << "triangles: " << mesh.size() << "\n";
  summary << "long_face_triangles: " << mesh.long_face_count() << "\n";
  summary << "clusters: " << clusters.size() << "\n";
  for (int b = 0; b < cfg.turbine.blade_count; ++b) {
    summary << "blade" << b << "_long_face_area_m2: " << geometry::long_face_area(mesh, b)
            << "\n";
  }
  std::cout << "mesh: " << mesh.size() << " triangles, " << clusters.size()
            << " surface clusters -> " << (dir / "turbine_mesh.obj").string() << "\n";
  return kExitOk;
}

int cmd_plan(const CommonOptions& opts, double spacing, const std::vector<double>& start) {
  sim::ScenarioConfig cfg = resolve_config(opts);
  if (spacing > 0.0) cfg.spacing = spacing;
  if (!start.empty()) {
    if (start.size() != 3) throw ConfigError("--start expects x y z");
    cfg.start_position = Eigen::Vector3d(start[0], start[1], start[2]);
  }
  const auto dir = prepare_out_dir(opts);

  const auto plan = planner::plan_inspection(cfg.turbine, cfg.spacing, cfg.start_position);
  planner::export_plan(plan.points, (dir / "plan.csv").string());
  config::save_config(cfg, (dir / "effective_config.json").string());

  std::cout << "plan: phase 1 " << plan.phase1_clusters << " clusters, tour length "
            << plan.phase1_tour_length << " m; phase 2 " << plan.phase2_clusters
            << " clusters, tour length " << plan.phase2_tour_length << " m\n";
  std::cout << "total tour length: " << plan.phase1_tour_length + plan.phase2_tour_length
            << " m, " << plan.points.size() << " inspection points -> "
            << (dir / "plan.csv").string() << "\n";
  return kExitOk;
}

int run_and_save(const sim::ScenarioConfig& cfg, const fs::path& dir,
                 const std::string& name, metrics::TrajectoryLog& log_out,
                 metrics::MetricsReport& report_out) {
  info("running scenario: " + name);
  log_out = sim::run_scenario(cfg);
  report_out = sim::compute_metrics(log_out, cfg);
  sim::save_log_csv(log_out, (dir / ("trajectory_" + name + ".csv")).string());
  sim::save_timing_csv(log_out, (dir / ("solver_timing_" + name + ".csv")).string());
  sim::save_metrics_report(report_out, name, log_out,
                           (dir / ("metrics_" + name + ".txt")).string());
  return log_out.aborted || log_out.unstable ? kExitSolver : kExitOk;
}

int cmd_simulate(const CommonOptions& opts, const std::string& controller, double wind,
                 bool wind_set, double duration) {
  sim::ScenarioConfig cfg = resolve_config(opts);
  if (!controller.empty()) cfg.controller = sim::controller_from_name(controller);
  if (wind_set) cfg.wind.mean_speed = wind;
  if (duration > 0.0) cfg.duration_cap = duration;
  const auto dir = prepare_out_dir(opts);
  config::save_config(cfg, (dir / "effective_config.json").string());

  metrics::TrajectoryLog log;
  metrics::MetricsReport report;
  const int rc =
      run_and_save(cfg, dir, sim::controller_name(cfg.controller), log, report);

  std::printf("%s: records=%zu coverage=%.2f%% SM=%.2f%% CM=%.4f (min %.4f) d=[%.3f %.3f %.3f] m\n",
              sim::controller_name(cfg.controller).c_str(), log.records.size(),
              report.coverage_pct, report.sm_pct, report.cm_mean, report.cm_min,
              report.distance.min, report.distance.mean, report.distance.max);
  if (log.aborted) std::printf("scenario aborted: %s\n", log.note.c_str());
  if (log.unstable) std::printf("scenario unstable: %s\n", log.note.c_str());
  return rc;
}

int cmd_compare(const CommonOptions& opts, double wind, bool wind_set) {
  sim::ScenarioConfig cfg = resolve_config(opts);
  if (wind_set) cfg.wind.mean_speed = wind;
  const auto dir = prepare_out_dir(opts);
  config::save_config(cfg, (dir / "effective_config.json").string());

  const std::vector<sim::Controller> controllers = {sim::Controller::VtNmpc,
                                                    sim::Controller::BaselineNmpc};
  sim::ComparisonReport comparison;
  int rc = kExitOk;
  for (const auto c : controllers) {
    sim::ScenarioConfig run_cfg = cfg;
    run_cfg.controller = c;
    sim::ControllerRun run;
    run.name = sim::controller_name(c);
    const int run_rc = run_and_save(run_cfg, dir, run.name, run.log, run.report);
    rc = std::max(rc, run_rc);
    write_series(run.log, dir / ("distance_" + run.name + ".csv"), &metrics::LogRecord::d,
                 "d");
    write_series(run.log, dir / ("centering_" + run.name + ".csv"), &metrics::LogRecord::h,
                 "cm");
    comparison.runs.push_back(std::move(run));
  }

  std::ofstream table(dir / "comparison.txt");
  if (!table) throw IoError("cannot open comparison report");
  table << "wind_mean_mps: " << cfg.wind.mean_speed << "\n";
  char buf[256];
  for (const auto& run : comparison.runs) {
    std::snprintf(buf, sizeof(buf),
                  "%s.coverage_pct: %.9g\n%s.sm_pct: %.9g\n%s.cm_mean: %.9g\n"
                  "%s.cm_min: %.9g\n%s.distance_mean: %.9g\n%s.distance_min: %.9g\n"
                  "%s.distance_max: %.9g\n",
                  run.name.c_str(), run.report.coverage_pct, run.name.c_str(),
                  run.report.sm_pct, run.name.c_str(), run.report.cm_mean, run.name.c_str(),
                  run.report.cm_min, run.name.c_str(), run.report.distance.mean,
                  run.name.c_str(), run.report.distance.min, run.name.c_str(),
                  run.report.distance.max);
    table << buf;
    std::printf("%-14s coverage=%.2f%% SM=%.2f%% CM=%.4f d_mean=%.3f d_min=%.3f\n",
                run.name.c_str(), run.report.coverage_pct, run.report.sm_pct,
                run.report.cm_mean, run.report.distance.mean, run.report.distance.min);
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automated wind-turbine inspection: mesh, plan, simulate, compare"};
  app.require_subcommand(1);

  CommonOptions mesh_opts, plan_opts, sim_opts, cmp_opts;

  auto* mesh_cmd = app.add_subcommand("mesh", "generate and export the turbine mesh");
  add_common(mesh_cmd, mesh_opts);
  int subdivisions = 0;
  mesh_cmd->add_option("--subdivisions", subdivisions, "length-wise panels per blade face");

  auto* plan_cmd = app.add_subcommand("plan", "compute the two-phase inspection plan");
  add_common(plan_cmd, plan_opts);
  double spacing = 0.0;
  std::vector<double> start;
  plan_cmd->add_option("--spacing", spacing, "inspection point spacing [m]");
  plan_cmd->add_option("--start", start, "tour start anchor x y z [m]")->expected(3);

  auto* sim_cmd = app.add_subcommand("simulate", "run one closed-loop scenario");
  add_common(sim_cmd, sim_opts);
  std::string controller;
  double wind = 0.0, duration = 0.0;
  bool sim_wind_set = false;
  sim_cmd->add_option("--controller", controller, "vt_nmpc | baseline_nmpc");
  sim_cmd->add_option("--wind", wind, "mean wind speed [m/s]")
      ->each([&sim_wind_set](const std::string&) { sim_wind_set = true; });
  sim_cmd->add_option("--duration", duration, "duration cap [s]");

  auto* cmp_cmd = app.add_subcommand("compare", "run both controllers under identical wind");
  add_common(cmp_cmd, cmp_opts);
  double cmp_wind = 0.0;
  bool cmp_wind_set = false;
  cmp_cmd->add_option("--wind", cmp_wind, "mean wind speed [m/s]")
      ->each([&cmp_wind_set](const std::string&) { cmp_wind_set = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (mesh_cmd->parsed()) return cmd_mesh(mesh_opts, subdivisions);
    if (plan_cmd->parsed()) return cmd_plan(plan_opts, spacing, start);
    if (sim_cmd->parsed()) return cmd_simulate(sim_opts, controller, wind, sim_wind_set, duration);
    if (cmp_cmd->parsed()) return cmd_compare(cmp_opts, cmp_wind, cmp_wind_set);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PlanningError& e) {
    std::cerr << "planning error: " << e.what() << "\n";
    return kExitPlanning;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
