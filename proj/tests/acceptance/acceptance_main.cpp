// Acceptance suite: runs every contract check end-to-end and prints one
// PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../test_util.hpp"
#include "wti/config.hpp"
#include "wti/controllers.hpp"
#include "wti/dynamics.hpp"
#include "wti/errors.hpp"
#include "wti/geometry.hpp"
#include "wti/metrics.hpp"
#include "wti/ocp.hpp"
#include "wti/planner.hpp"
#include "wti/simulator.hpp"

using namespace wti;
using dynamics::ControlInput;
using dynamics::State;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Criterion> g_results;

void record(int id, const std::string& name, bool pass, const std::string& detail) {
  g_results.push_back({id, name, pass, detail});
  std::printf("[%s] criterion %2d: %s -- %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const dynamics::VehicleParams kParams;

// ---------------------------------------------------------------------------
// Criteria 1 & 2: planner optimality and the cluster-pair constraint.
// ---------------------------------------------------------------------------
void check_planner() {
  const double t0 = now_seconds();
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  int mismatches = 0;
  int adjacency_failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int clusters = 3 + trial % 5;
    const auto nodes = testutil::random_instance(rng, clusters);
    const Eigen::Vector3d start(60 * u(rng), 60 * u(rng), 60 * u(rng));
    const auto tour = planner::solve_tour(nodes, start);
    const auto oracle = testutil::brute_force_tour(nodes, start);
    if (std::abs(tour.total_length - oracle.total_length) > 1e-9) ++mismatches;
    if (!testutil::cluster_pairs_adjacent(tour)) ++adjacency_failures;
  }

  const auto spec = geometry::TurbineSpec::vestas_v100();
  const auto clusters = planner::cluster_surfaces(geometry::generate_turbine_mesh(spec));
  const auto tour =
      planner::solve_tour(planner::make_tour_nodes(clusters), Eigen::Vector3d(7, 0, 2));
  const bool v100_local_optimal = !testutil::improves_by_single_move(tour);
  if (!testutil::cluster_pairs_adjacent(tour)) ++adjacency_failures;
  const double elapsed = now_seconds() - t0;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "200 random instances, 0 allowed mismatches, got %d; v100 2-opt improvable=%s; "
                "%.2f s (budget 10 s)",
                mismatches, v100_local_optimal ? "no" : "yes", elapsed);
  record(1, "planner optimality vs brute-force oracle",
         mismatches == 0 && v100_local_optimal && elapsed < 10.0, buf);

  std::snprintf(buf, sizeof(buf), "%d adjacency violations across 201 tours",
                adjacency_failures);
  record(2, "cluster-pair constraint in every tour", adjacency_failures == 0, buf);
}

// ---------------------------------------------------------------------------
// Criterion 3: dynamics fidelity.
// ---------------------------------------------------------------------------
void check_dynamics() {
  bool ok = true;
  std::string detail;

  // Hover drift over 10 s.
  State state;
  const ControlInput hover{Eigen::Vector3d::Zero(), kParams.hover_thrust()};
  double worst_norm_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    state = dynamics::integrate_step(state, hover, Eigen::Vector3d::Zero(), kParams, 0.01);
    worst_norm_err =
        std::max(worst_norm_err, std::abs(state.attitude.norm() - 1.0));
  }
  const double hover_drift = state.position.norm();
  ok = ok && hover_drift < 1e-9;

  // Free fall, 1 s.
  State falling;
  for (int i = 0; i < 100; ++i) {
    falling = dynamics::integrate_step(falling, {Eigen::Vector3d::Zero(), 0.0},
                                       Eigen::Vector3d::Zero(), kParams, 0.01);
  }
  const double fall_err = std::abs(falling.position.z() + 0.5 * kParams.gravity);
  ok = ok && fall_err < 1e-4;

  // Constant roll rate, closed form.
  State rolling;
  for (int i = 0; i < 200; ++i) {
    rolling = dynamics::integrate_step(rolling, {Eigen::Vector3d(0.5, 0, 0), 0.0},
                                       Eigen::Vector3d::Zero(), kParams, 0.01);
    worst_norm_err =
        std::max(worst_norm_err, std::abs(rolling.attitude.norm() - 1.0));
  }
  const double roll_err = rolling.attitude.angularDistance(
      Eigen::Quaterniond(Eigen::AngleAxisd(1.0, Eigen::Vector3d::UnitX())));
  ok = ok && roll_err < 1e-4;
  ok = ok && worst_norm_err < 1e-9;

  // Analytic Jacobian vs central differences at 100 random states.
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> uw(-2.0, 2.0);
  double worst_jac = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const State s = testutil::random_state(rng);
    const ControlInput c = testutil::random_control(rng, kParams.hover_thrust());
    const Eigen::Vector3d wind(uw(rng), uw(rng), uw(rng));
    dynamics::StateMat dfdx;
    dynamics::InputMat dfdu;
    dynamics::linearize_derivative(s, c, wind, kParams, dfdx, dfdu);
    const dynamics::StateVec x0 = s.to_vec();
    for (int i = 0; i < 10; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x0(i)));
      dynamics::StateVec xp = x0, xm = x0;
      xp(i) += h;
      xm(i) -= h;
      const dynamics::StateVec fd =
          (dynamics::state_derivative(State::from_vec(xp), c, wind, kParams) -
           dynamics::state_derivative(State::from_vec(xm), c, wind, kParams)) /
          (2.0 * h);
      for (int row = 0; row < 10; ++row) {
        worst_jac = std::max(worst_jac, std::abs(dfdx(row, i) - fd(row)) /
                                            std::max(1.0, std::abs(dfdx(row, i))));
      }
    }
    const Eigen::Vector4d u0 = c.to_vec();
    for (int i = 0; i < 4; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(u0(i)));
      Eigen::Vector4d up = u0, um = u0;
      up(i) += h;
      um(i) -= h;
      const dynamics::StateVec fd =
          (dynamics::state_derivative(s, ControlInput::from_vec(up), wind, kParams) -
           dynamics::state_derivative(s, ControlInput::from_vec(um), wind, kParams)) /
          (2.0 * h);
      for (int row = 0; row < 10; ++row) {
        worst_jac = std::max(worst_jac, std::abs(dfdu(row, i) - fd(row)) /
                                            std::max(1.0, std::abs(dfdu(row, i))));
      }
    }
  }
  ok = ok && worst_jac < 1e-5;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "hover drift %.2e m, fall err %.2e, roll err %.2e, |q|-1 max %.2e, jac rel "
                "%.2e",
                hover_drift, fall_err, roll_err, worst_norm_err, worst_jac);
  record(3, "dynamics fidelity", ok, buf);
}

// ---------------------------------------------------------------------------
// Criterion 4: visual-function geometry at the stand-off pose.
// ---------------------------------------------------------------------------
void check_visual_geometry() {
  const control::VisualReferences vrefs;  // d_ref = 7
  double worst = 0.0;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Vector3d p(20 * u(rng), 20 * u(rng), 50 + 20 * u(rng));
    const double az = M_PI * u(rng);
    const Eigen::Vector3d n(std::cos(az), std::sin(az), 0.0);
    State s;
    s.position = p + vrefs.d_ref * n;
    s.attitude = Eigen::Quaterniond(
        Eigen::AngleAxisd(std::atan2(-n.y(), -n.x()), Eigen::Vector3d::UnitZ()));
    worst = std::max(worst, std::abs(control::heading_function(s, p) - 1.0));
    worst = std::max(worst, std::abs(control::distance_function(s, p) - vrefs.d_ref));
    worst = std::max(worst, std::abs(control::roi_function(s, p, n) - vrefs.r_ref()));
    worst = std::max(worst, std::abs(control::orthogonality_function(s, p, n)));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |deviation| at the optimum pose: %.2e (tol 1e-9)",
                worst);
  record(4, "visual-function geometry (h=1, d=r=d_ref, o=0)", worst < 1e-9, buf);
}

// ---------------------------------------------------------------------------
// Criterion 5: solver correctness (gradient, bounds, fixed point).
// ---------------------------------------------------------------------------
void check_solver() {
  const control::ControllerWeights weights;
  const control::VisualReferences vrefs;
  bool ok = true;

  // Condensed gradient vs finite differences (20 random states).
  const int horizon = 12;
  ocp::SolverConfig cfg = ocp::SolverConfig::for_vehicle(kParams);
  cfg.horizon = horizon;
  ocp::RtiSolver solver(cfg, kParams);

  std::vector<control::StageReference> refs(horizon + 1);
  for (auto& r : refs) {
    r.point = Eigen::Vector3d(0, 0, 20);
    r.normal_xy = Eigen::Vector3d(1, 0, 0);
    r.body_velocity_ref.setZero();
  }
  ocp::ResidualModel model;
  model.stage_dim = control::kResidualDim;
  model.terminal_dim = 5;
  model.stage = [&refs, &weights, &vrefs](const State& x, const ControlInput& u, int k,
                                          Eigen::Ref<Eigen::VectorXd> out) {
    out = control::vt_nmpc_residuals(x, u, refs[k], weights, vrefs, kParams);
  };
  model.terminal = [&weights](const State& x, Eigen::Ref<Eigen::VectorXd> out) {
    out = control::terminal_residuals(x, Eigen::Vector3d::Zero(), weights);
  };

  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_grad = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    State x0;
    x0.position = Eigen::Vector3d(7 + u(rng), u(rng), 20 + u(rng));
    x0.velocity = 0.5 * Eigen::Vector3d(u(rng), u(rng), u(rng));
    x0.attitude = Eigen::Quaterniond(
        Eigen::AngleAxisd(M_PI + 0.3 * u(rng), Eigen::Vector3d::UnitZ()) *
        Eigen::AngleAxisd(0.1 * u(rng), Eigen::Vector3d::UnitY()));
    std::vector<ControlInput> controls(horizon);
    for (auto& c : controls) {
      c.body_rates = 0.3 * Eigen::Vector3d(u(rng), u(rng), u(rng));
      c.thrust = kParams.hover_thrust() * (1.0 + 0.2 * u(rng));
    }
    const auto warm = solver.rollout_solution(x0, controls);
    const auto qp = solver.assemble(x0, model, warm);
    for (int j = 0; j < 4 * horizon; j += 5) {
      const int stage = j / 4;
      const int comp = j % 4;
      const double h = 1e-6 * (1.0 + std::abs(controls[stage].to_vec()(comp)));
      auto up = controls, um = controls;
      Eigen::Vector4d v = controls[stage].to_vec();
      v(comp) += h;
      up[stage] = ControlInput::from_vec(v);
      v(comp) = controls[stage].to_vec()(comp) - h;
      um[stage] = ControlInput::from_vec(v);
      const double fd = (solver.objective_value(model, solver.rollout_solution(x0, up)) -
                         solver.objective_value(model, solver.rollout_solution(x0, um))) /
                        (2.0 * h);
      worst_grad =
          std::max(worst_grad, std::abs(qp.gradient(j) - fd) /
                                   std::max(1.0, std::abs(qp.gradient(j))));
    }
  }
  ok = ok && worst_grad < 1e-4;

  // Exact bound satisfaction under an infeasible demand.
  ocp::SolverConfig full_cfg = ocp::SolverConfig::for_vehicle(kParams);
  ocp::RtiSolver full_solver(full_cfg, kParams);
  ocp::ResidualModel demand;
  demand.stage_dim = 4;
  demand.terminal_dim = 1;
  const double target = 200.0 * M_PI / 180.0;
  demand.stage = [target](const State&, const ControlInput& c, int,
                          Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = c.body_rates.x() - target;
    out(1) = c.body_rates.y() + target;
    out(2) = c.body_rates.z() - target;
    out(3) = 0.05 * (c.thrust - kParams.hover_thrust());
  };
  demand.terminal = [](const State&, Eigen::Ref<Eigen::VectorXd> out) { out(0) = 0.0; };
  State origin;
  const auto [clipped, demand_sol] =
      full_solver.step(origin, demand, full_solver.initial_solution(origin));
  bool bounds_exact = clipped.body_rates.x() == full_cfg.control_upper(0) &&
                      clipped.body_rates.y() == full_cfg.control_lower(1) &&
                      clipped.body_rates.z() == full_cfg.control_upper(2);
  for (const auto& c : demand_sol.controls) {
    const Eigen::Vector4d v = c.to_vec();
    for (int i = 0; i < 4; ++i) {
      bounds_exact =
          bounds_exact && v(i) >= full_cfg.control_lower(i) && v(i) <= full_cfg.control_upper(i);
    }
  }
  ok = ok && bounds_exact;

  // Zero-residual fixed point.
  std::vector<control::StageReference> fixed_refs(full_cfg.horizon + 1);
  for (auto& r : fixed_refs) {
    r.point = Eigen::Vector3d(0, 0, 20);
    r.normal_xy = Eigen::Vector3d(1, 0, 0);
    r.body_velocity_ref.setZero();
  }
  ocp::ResidualModel fixed_model = model;
  fixed_model.stage = [&fixed_refs, &weights, &vrefs](const State& x, const ControlInput& c,
                                                      int k, Eigen::Ref<Eigen::VectorXd> out) {
    out = control::vt_nmpc_residuals(x, c, fixed_refs[k], weights, vrefs, kParams);
  };
  State optimum;
  optimum.position = Eigen::Vector3d(7, 0, 20);
  optimum.attitude =
      Eigen::Quaterniond(Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitZ()));
  const auto [u_fix, sol_fix] =
      full_solver.step(optimum, fixed_model, full_solver.initial_solution(optimum));
  const double fix_err =
      std::max(u_fix.body_rates.norm(), std::abs(u_fix.thrust - kParams.hover_thrust()));
  ok = ok && fix_err < 1e-6;

  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "gradient rel err %.2e (tol 1e-4); bounds exact=%s; fixed-point err %.2e",
                worst_grad, bounds_exact ? "yes" : "no", fix_err);
  record(5, "solver correctness (gradient, bounds, fixed point)", ok, buf);
}

// ---------------------------------------------------------------------------
// Criterion 6: closed-loop convergence on a static point.
// ---------------------------------------------------------------------------
void check_closed_loop_convergence() {
  sim::ScenarioConfig cfg = config::preset("sim-full-scale");
  planner::InspectionPoint point;
  point.position = Eigen::Vector3d(0, 0, 2);
  point.normal = Eigen::Vector3d(1, 0, 0);
  cfg.plan_override = std::vector<planner::InspectionPoint>{point};
  dynamics::State start;
  start.position = Eigen::Vector3d(9.0, 3.0, 1.0);
  start.attitude = Eigen::Quaterniond(
      Eigen::AngleAxisd(std::atan2(-3.0, -9.0), Eigen::Vector3d::UnitZ()));
  cfg.initial_state_override = start;
  cfg.settle_time = 10.0;
  cfg.wind.mean_speed = 0.0;
  cfg.wind.sinusoid_std = 0.0;

  const auto log = sim::run_scenario(cfg);
  const auto& last = log.records.back();
  const Eigen::Vector3d optimum(7, 0, 2);
  const double pose_err = (last.state.position - optimum).norm();
  const double h_err = std::abs(last.h - 1.0);
  const bool ok = pose_err < 0.05 && h_err < 1e-3 &&
                  log.records.size() <= static_cast<std::size_t>(std::llround(10.0 / log.dt));

  char buf[160];
  std::snprintf(buf, sizeof(buf), "pose err %.3f m (tol 0.05), |h-1| %.2e (tol 1e-3), %.1f s",
                pose_err, h_err, log.records.size() * log.dt);
  record(6, "closed-loop convergence to the stand-off pose", ok, buf);
}

// ---------------------------------------------------------------------------
// Criteria 7-10: full-scale scenarios.
// ---------------------------------------------------------------------------
struct FullScaleRun {
  metrics::TrajectoryLog log;
  metrics::MetricsReport report;
  double wall_seconds = 0.0;
};

FullScaleRun run_full_scale(sim::Controller controller, double wind_mean) {
  sim::ScenarioConfig cfg = config::preset("sim-full-scale");
  cfg.controller = controller;
  cfg.wind.mean_speed = wind_mean;
  FullScaleRun run;
  const double t0 = now_seconds();
  run.log = sim::run_scenario(cfg);
  run.wall_seconds = now_seconds() - t0;
  run.report = sim::compute_metrics(run.log, cfg);
  std::fprintf(stderr,
               "  [%s wind=%g] records=%zu wall=%.0fs coverage=%.2f SM=%.2f CM=%.4f "
               "d=[%.2f %.2f %.2f]\n",
               sim::controller_name(controller).c_str(), wind_mean, run.log.records.size(),
               run.wall_seconds, run.report.coverage_pct, run.report.sm_pct,
               run.report.cm_mean, run.report.distance.min, run.report.distance.mean,
               run.report.distance.max);
  return run;
}

void check_full_scale() {
  std::fprintf(stderr, "running full-scale scenarios (several minutes)...\n");
  const FullScaleRun vt4 = run_full_scale(sim::Controller::VtNmpc, 4.0);
  const FullScaleRun base4 = run_full_scale(sim::Controller::BaselineNmpc, 4.0);

  // Criterion 7: windy-run quality band and dominance under the identical wind.
  const bool vt_band = vt4.report.coverage_pct >= 99.0 && vt4.report.sm_pct >= 95.0 &&
                       vt4.report.cm_mean >= 0.99;
  const bool dominated =
      vt4.report.coverage_pct >= base4.report.coverage_pct &&
      vt4.report.sm_pct >= base4.report.sm_pct &&
      (vt4.report.coverage_pct > base4.report.coverage_pct ||
       vt4.report.sm_pct > base4.report.sm_pct);
  const bool runtime_ok = vt4.wall_seconds < 300.0 && base4.wall_seconds < 300.0;
  {
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "VT: cov %.2f%% SM %.2f%% CM %.4f | baseline: cov %.2f%% SM %.2f%% | "
                  "wall %.0f/%.0f s (budget 300)",
                  vt4.report.coverage_pct, vt4.report.sm_pct, vt4.report.cm_mean,
                  base4.report.coverage_pct, base4.report.sm_pct, vt4.wall_seconds,
                  base4.wall_seconds);
    record(7, "4 m/s wind: VT-NMPC band and dominance", vt_band && dominated && runtime_ok,
           buf);
  }

  // Criterion 9: distance discipline of the same VT run.
  {
    const bool ok = std::abs(vt4.report.distance.mean - 7.0) <= 0.2 &&
                    vt4.report.distance.min >= 6.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "mean %.3f m (7.0 +- 0.2), min %.3f m (>= 6.0)",
                  vt4.report.distance.mean, vt4.report.distance.min);
    record(9, "4 m/s wind: distance discipline", ok, buf);
  }

  // Criterion 10: solver latency from the VT run (>= 1000 steps).
  {
    std::vector<double> times;
    times.reserve(vt4.log.records.size());
    for (const auto& rec : vt4.log.records) times.push_back(rec.solve_time);
    std::sort(times.begin(), times.end());
    const double median = times.empty() ? 1e9 : times[times.size() / 2];
    char buf[128];
    std::snprintf(buf, sizeof(buf), "median rti step %.3f ms over %zu steps (tol 10 ms)",
                  1e3 * median, times.size());
    record(10, "solver latency", times.size() >= 1000 && median <= 0.010, buf);
  }

  // Criterion 8: zero wind, both controllers reach full coverage; the
  // calm-air VT run must also hold the nominal stand-off tightly.
  const FullScaleRun vt0 = run_full_scale(sim::Controller::VtNmpc, 0.0);
  const FullScaleRun base0 = run_full_scale(sim::Controller::BaselineNmpc, 0.0);
  {
    const bool ok = vt0.report.coverage_pct == 100.0 && base0.report.coverage_pct == 100.0 &&
                    std::abs(vt0.report.distance.mean - 7.0) <= 0.1;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "VT %.2f%%, baseline %.2f%%; calm VT mean d %.3f m",
                  vt0.report.coverage_pct, base0.report.coverage_pct,
                  vt0.report.distance.mean);
    record(8, "zero wind: both controllers reach 100% coverage", ok, buf);
  }
}

// ---------------------------------------------------------------------------
// Criteria 11 & 12: small-scale preset and determinism.
// ---------------------------------------------------------------------------
void check_small_scale_and_determinism() {
  sim::ScenarioConfig cfg = config::preset("lab-small-scale");
  cfg.wind.mean_speed = 4.0;  // blowing-tunnel condition

  const auto log_a = sim::run_scenario(cfg);
  const auto report_a = sim::compute_metrics(log_a, cfg);
  {
    const bool ok = report_a.sm_pct >= 95.0 && report_a.coverage_pct >= 99.0;
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "SM %.2f%% (>= 95), coverage %.2f%% (>= 99), d_ref 0.5 m, margin 0.1 m",
                  report_a.sm_pct, report_a.coverage_pct);
    record(11, "small-scale preset band", ok, buf);
  }

  const auto log_b = sim::run_scenario(cfg);
  const auto report_b = sim::compute_metrics(log_b, cfg);
  const auto dir = std::filesystem::temp_directory_path();
  const auto pa = (dir / "wti_acc_a.csv").string();
  const auto pb = (dir / "wti_acc_b.csv").string();
  const auto ra = (dir / "wti_acc_a.txt").string();
  const auto rb = (dir / "wti_acc_b.txt").string();
  sim::save_log_csv(log_a, pa);
  sim::save_log_csv(log_b, pb);
  sim::save_metrics_report(report_a, "vt_nmpc", log_a, ra);
  sim::save_metrics_report(report_b, "vt_nmpc", log_b, rb);
  const bool identical = file_bytes(pa) == file_bytes(pb) && file_bytes(ra) == file_bytes(rb);
  std::filesystem::remove(pa);
  std::filesystem::remove(pb);
  std::filesystem::remove(ra);
  std::filesystem::remove(rb);
  record(12, "determinism: byte-identical logs and reports", identical,
         identical ? "trajectory and report files match" : "files differ");
}

}  // namespace

int main() {
  const double t0 = now_seconds();
  check_planner();
  check_dynamics();
  check_visual_geometry();
  check_solver();
  check_closed_loop_convergence();
  check_full_scale();
  check_small_scale_and_determinism();

  int failures = 0;
  for (const auto& c : g_results) {
    if (!c.pass) ++failures;
  }
  std::printf("acceptance: %zu criteria, %d failed, %.0f s total\n", g_results.size(),
              failures, now_seconds() - t0);
  return failures == 0 ? 0 : 1;
}
