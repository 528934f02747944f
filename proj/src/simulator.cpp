#include "wti/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "wti/errors.hpp"

namespace wti::sim {

using control::StageReference;
using dynamics::ControlInput;
using dynamics::State;

std::string controller_name(Controller c) {
  return c == Controller::VtNmpc ? "vt_nmpc" : "baseline_nmpc";
}

Controller controller_from_name(const std::string& name) {
  if (name == "vt_nmpc") return Controller::VtNmpc;
  if (name == "baseline_nmpc") return Controller::BaselineNmpc;
  throw ConfigError("unknown controller '" + name + "' (vt_nmpc | baseline_nmpc)");
}

void ScenarioConfig::validate() const {
  turbine.validate();
  solver.validate();
  camera.validate();
  if (!(duration_cap > 0.0)) throw ConfigError("scenario: duration_cap must be > 0");
  if (!(control_period > 0.0) || control_period > 0.05) {
    throw ConfigError("scenario: control_period must lie in (0, 0.05]");
  }
  if (solver.stage_duration + 1e-12 < control_period) {
    throw ConfigError("scenario: the prediction stage cannot be shorter than the loop period");
  }
  if (!(references.d_ref > safety_margin)) {
    throw ConfigError("scenario: d_ref must exceed the safety margin");
  }
  if (!(progression_speed > 0.0)) throw ConfigError("scenario: progression speed must be > 0");
  if (!(spacing > 0.0)) throw ConfigError("scenario: spacing must be > 0");
  if (!(settle_time >= 0.0)) throw ConfigError("scenario: settle time must be >= 0");
}

namespace {

ocp::ResidualModel make_vt_model(const std::vector<StageReference>& refs,
                                 const control::ControllerWeights& weights,
                                 const control::VisualReferences& vrefs,
                                 const dynamics::VehicleParams& params) {
  // The reference containers must outlive the returned model; the simulator
  // keeps them alive for the duration of each solver call.
  const auto* r = &refs;
  const auto* w = &weights;
  const auto* v = &vrefs;
  const auto* p = &params;
  ocp::ResidualModel model;
  model.stage_dim = control::kResidualDim;
  model.terminal_dim = 5;
  model.stage = [r, w, v, p](const State& x, const ControlInput& u, int k,
                             Eigen::Ref<Eigen::VectorXd> out) {
    out = control::vt_nmpc_residuals(x, u, (*r)[k], *w, *v, *p);
  };
  model.terminal = [r, w](const State& x, Eigen::Ref<Eigen::VectorXd> out) {
    out = control::terminal_residuals(x, r->back().body_velocity_ref, *w);
  };
  return model;
}

ocp::ResidualModel make_baseline_model(const std::vector<control::BaselineReference>& refs,
                                       const control::ControllerWeights& weights,
                                       const dynamics::VehicleParams& params) {
  const auto* r = &refs;
  const auto* w = &weights;
  const auto* p = &params;
  ocp::ResidualModel model;
  model.stage_dim = control::kResidualDim;
  model.terminal_dim = 5;
  model.stage = [r, w, p](const State& x, const ControlInput& u, int k,
                          Eigen::Ref<Eigen::VectorXd> out) {
    out = control::baseline_nmpc_residuals(x, u, (*r)[k], *w, *p);
  };
  model.terminal = [r, w](const State& x, Eigen::Ref<Eigen::VectorXd> out) {
    out = control::terminal_residuals(x, r->back().body_velocity_ref, *w);
  };
  return model;
}

// The mission log starts in the inspection regime: hovering at the first
// point's stand-off pose, facing the surface. Takeoff and ferry flight are
// out of scope of the metrics.
State initial_state(const ScenarioConfig& config, const control::ReferencePath& path) {
  if (config.initial_state_override) return *config.initial_state_override;
  const auto sample = path.sample(0.0);
  State state;
  state.position = sample.point + config.references.d_ref * sample.normal_xy;
  const double yaw = std::atan2(0.0 - sample.normal_xy.y(), 0.0 - sample.normal_xy.x());
  state.attitude = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
  return state;
}

}  // namespace

metrics::TrajectoryLog run_scenario(const ScenarioConfig& config) {
  config.validate();

  std::vector<std::vector<planner::InspectionPoint>> phases;
  if (config.plan_override) {
    if (config.plan_override->empty()) throw PlanningError("run_scenario: empty plan override");
    phases.push_back(*config.plan_override);
  } else {
    const auto plan =
        planner::plan_inspection(config.turbine, config.spacing, config.start_position);
    phases.push_back(plan.phase_points(1));
    auto phase2 = plan.phase_points(2);
    if (!phase2.empty()) phases.push_back(std::move(phase2));
  }

  metrics::TrajectoryLog log;
  const double dt = config.control_period;
  log.dt = dt;

  const long max_steps = static_cast<long>(std::llround(config.duration_cap / dt));
  // The prediction grid is coarser than the loop; the warm start shifts one
  // stage only when the loop has advanced one full stage.
  const long steps_per_stage =
      std::max<long>(1, std::llround(config.solver.stage_duration / dt));

  std::vector<control::ReferencePath> paths;
  paths.reserve(phases.size());
  for (const auto& pts : phases) paths.emplace_back(pts, config.references.d_ref);

  State state = initial_state(config, paths.front());
  ocp::RtiSolver solver(config.solver, config.vehicle);
  ocp::OcpSolution warm = solver.initial_solution(state);

  double t = 0.0;
  long step_count = 0;
  long degraded_count = 0;

  for (std::size_t phase_idx = 0; phase_idx < phases.size() && !log.aborted; ++phase_idx) {
    const int phase = phases[phase_idx].empty() ? 1 : phases[phase_idx].front().phase;
    const control::ReferencePath& path = paths[phase_idx];
    const double phase_end = path.total_length() / config.progression_speed + config.settle_time;

    double phase_time = 0.0;
    while (phase_time < phase_end - 0.5 * dt) {
      if (step_count >= max_steps) {
        log.note = "duration cap reached";
        break;
      }
      metrics::LogRecord rec;
      rec.t = t;
      rec.phase = phase;
      rec.state = state;

      try {
        const auto active = path.sample(config.progression_speed * phase_time);
        rec.point = active.point;
        rec.normal_xy = active.normal_xy;
        rec.in_transit = active.in_transit;

        ControlInput u;
        ocp::OcpSolution sol;
        if (config.controller == Controller::VtNmpc) {
          const auto refs = control::generate_references(
              path, phase_time, config.progression_speed, config.solver.horizon,
              config.solver.stage_duration, state);
          const auto model =
              make_vt_model(refs, config.weights, config.references, config.vehicle);
          std::tie(u, sol) = solver.step(state, model, warm);
        } else {
          const auto refs = control::generate_baseline_references(
              path, phase_time, config.progression_speed, config.solver.horizon,
              config.solver.stage_duration, state, config.references.d_ref);
          const auto model = make_baseline_model(refs, config.weights, config.vehicle);
          std::tie(u, sol) = solver.step(state, model, warm);
        }

        rec.control = u;
        rec.objective = sol.objective;
        rec.qp_iterations = sol.qp_iterations;
        rec.solve_time = sol.solve_time;
        rec.degraded = sol.degraded;
        if (sol.degraded) ++degraded_count;
        warm = ((step_count + 1) % steps_per_stage == 0)
                   ? ocp::RtiSolver::shift_warm_start(sol)
                   : sol;

        try {
          rec.h = control::heading_function(state, rec.point);
        } catch (const DegenerateGeometry&) {
          rec.h = std::numeric_limits<double>::quiet_NaN();
        }
        rec.d = control::distance_function(state, rec.point);
        rec.r = control::roi_function(state, rec.point, rec.normal_xy);
        rec.o = control::orthogonality_function(state, rec.point, rec.normal_xy);

        const Eigen::Vector3d gust = dynamics::wind_accel(t, config.wind, config.vehicle.mass);
        state = dynamics::integrate_step(state, u, gust, config.vehicle, dt);
      } catch (const SolverError& e) {
        log.aborted = true;
        log.note = std::string("fault: ") + e.what();
        log.records.push_back(rec);
        break;
      }

      log.records.push_back(rec);
      t += dt;
      phase_time += dt;
      ++step_count;
    }
    if (step_count >= max_steps) break;
  }

  if (!log.records.empty() &&
      degraded_count > static_cast<long>(log.records.size()) / 10) {
    log.unstable = true;
    if (log.note.empty()) log.note = "degraded-step rate exceeded 10%";
  }
  return log;
}

metrics::MetricsReport compute_metrics(const metrics::TrajectoryLog& log,
                                       const ScenarioConfig& config) {
  metrics::MetricsReport report;
  const auto mesh1 = geometry::generate_turbine_mesh(config.turbine);
  geometry::TurbineSpec rotated = config.turbine;
  rotated.assembly_rotation_deg += 120.0;
  const auto mesh2 = geometry::generate_turbine_mesh(rotated);
  report.coverage_pct = metrics::coverage_percent_two_phase(log, mesh1, mesh2, config.camera);
  report.sm_pct = metrics::safety_metric(log, config.references.d_ref, config.safety_margin);
  const auto cm = metrics::centering_metric(log);
  report.cm_mean = cm.mean;
  report.cm_min = cm.min;
  report.degenerate_records = cm.degenerate_records;
  report.distance = metrics::distance_stats(log);

  const auto surface = metrics::surface_records(log);
  if (!surface.records.empty()) {
    report.sm_surface_pct =
        metrics::safety_metric(surface, config.references.d_ref, config.safety_margin);
    report.cm_surface_mean = metrics::centering_metric(surface).mean;
    report.distance_surface = metrics::distance_stats(surface);
  }
  return report;
}

ComparisonReport run_comparison(const ScenarioConfig& base,
                                const std::vector<Controller>& controllers) {
  if (controllers.size() < 2) {
    throw ConfigError("run_comparison: need at least two controller selectors");
  }
  ComparisonReport report;
  for (const auto c : controllers) {
    ScenarioConfig cfg = base;
    cfg.controller = c;
    ControllerRun run;
    run.name = controller_name(c);
    run.log = run_scenario(cfg);
    run.report = compute_metrics(run.log, cfg);
    report.runs.push_back(std::move(run));
  }
  return report;
}

void save_log_csv(const metrics::TrajectoryLog& log, const std::string& path) {
  if (path.empty()) throw IoError("log export: empty path");
  std::ofstream out(path);
  if (!out) throw IoError("log export: cannot open '" + path + "'");
  out << "t,phase,x,y,z,u,v,w,qx,qy,qz,qw,p,q,r,T,px,py,pz,nx,ny,h,d,r_fn,o,objective,"
         "qp_iterations,degraded,transit\n";
  char buf[640];
  for (const auto& rec : log.records) {
    const auto& s = rec.state;
    std::snprintf(
        buf, sizeof(buf),
        "%.9g,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.12g,%.12g,%.12g,%.12g,%.9g,%.9g,%.9g,%.9g,"
        "%.9g,%.9g,%.9g,%.9g,%.9g,%.12g,%.9g,%.9g,%.9g,%.9g,%d,%d,%d\n",
        rec.t, rec.phase, s.position.x(), s.position.y(), s.position.z(), s.velocity.x(),
        s.velocity.y(), s.velocity.z(), s.attitude.x(), s.attitude.y(), s.attitude.z(),
        s.attitude.w(), rec.control.body_rates.x(), rec.control.body_rates.y(),
        rec.control.body_rates.z(), rec.control.thrust, rec.point.x(), rec.point.y(),
        rec.point.z(), rec.normal_xy.x(), rec.normal_xy.y(), rec.h, rec.d, rec.r, rec.o,
        rec.objective, rec.qp_iterations, rec.degraded ? 1 : 0, rec.in_transit ? 1 : 0);
    out << buf;
  }
  out << "# dt=" << log.dt << " unstable=" << (log.unstable ? 1 : 0)
      << " aborted=" << (log.aborted ? 1 : 0) << " note=" << log.note << "\n";
  if (!out.good()) throw IoError("log export: write failed for '" + path + "'");
}

void save_timing_csv(const metrics::TrajectoryLog& log, const std::string& path) {
  if (path.empty()) throw IoError("timing export: empty path");
  std::ofstream out(path);
  if (!out) throw IoError("timing export: cannot open '" + path + "'");
  out << "t,solve_time\n";
  char buf[64];
  for (const auto& rec : log.records) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", rec.t, rec.solve_time);
    out << buf;
  }
}

void save_metrics_report(const metrics::MetricsReport& report, const std::string& name,
                         const metrics::TrajectoryLog& log, const std::string& path) {
  if (path.empty()) throw IoError("report export: empty path");
  std::ofstream out(path);
  if (!out) throw IoError("report export: cannot open '" + path + "'");
  char buf[768];
  std::snprintf(buf, sizeof(buf),
                "controller: %s\n"
                "records: %zu\n"
                "coverage_pct: %.9g\n"
                "sm_pct: %.9g\n"
                "cm_mean: %.9g\n"
                "cm_min: %.9g\n"
                "distance_mean: %.9g\n"
                "distance_min: %.9g\n"
                "distance_max: %.9g\n"
                "sm_surface_pct: %.9g\n"
                "cm_surface_mean: %.9g\n"
                "distance_surface_mean: %.9g\n"
                "distance_surface_min: %.9g\n"
                "distance_surface_max: %.9g\n"
                "degenerate_records: %d\n"
                "unstable: %d\n"
                "aborted: %d\n",
                name.c_str(), log.records.size(), report.coverage_pct, report.sm_pct,
                report.cm_mean, report.cm_min, report.distance.mean, report.distance.min,
                report.distance.max, report.sm_surface_pct, report.cm_surface_mean,
                report.distance_surface.mean, report.distance_surface.min,
                report.distance_surface.max, report.degenerate_records, log.unstable ? 1 : 0,
                log.aborted ? 1 : 0);
  out << buf;
  if (!out.good()) throw IoError("report export: write failed for '" + path + "'");
}

}  // namespace wti::sim
