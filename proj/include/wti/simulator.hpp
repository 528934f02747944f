#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wti/controllers.hpp"
#include "wti/dynamics.hpp"
#include "wti/geometry.hpp"
#include "wti/metrics.hpp"
#include "wti/ocp.hpp"
#include "wti/planner.hpp"

namespace wti::sim {

enum class Controller { VtNmpc, BaselineNmpc };

std::string controller_name(Controller c);
Controller controller_from_name(const std::string& name);

struct ScenarioConfig {
  geometry::TurbineSpec turbine = geometry::TurbineSpec::vestas_v100();
  dynamics::VehicleParams vehicle;
  dynamics::WindModel wind;
  ocp::SolverConfig solver;
  control::ControllerWeights weights;
  control::VisualReferences references;
  metrics::CameraModel camera;

  Controller controller = Controller::VtNmpc;
  double control_period = 0.01;    // s, loop and plant step (100 Hz)
  double progression_speed = 0.7;  // m/s
  double spacing = 2.0;            // m, plan interpolation
  Eigen::Vector3d start_position{7.0, 0.0, 2.0};
  double safety_margin = 1.0;  // m
  double duration_cap = 3600.0;  // s
  double settle_time = 3.0;      // s after the plan is exhausted
  unsigned seed = 0;             // echoed for reproducibility; the wind is deterministic

  // Test hook: bypass the planner with an explicit point list (single phase).
  std::optional<std::vector<planner::InspectionPoint>> plan_override;
  // Test hook: start somewhere other than the first stand-off pose.
  std::optional<dynamics::State> initial_state_override;

  void validate() const;
};

// Closed loop at the shooting grid rate: references -> one RTI step -> plant
// step under wind. Phase 2 runs on the rotated assembly. Deterministic.
metrics::TrajectoryLog run_scenario(const ScenarioConfig& config);

metrics::MetricsReport compute_metrics(const metrics::TrajectoryLog& log,
                                       const ScenarioConfig& config);

struct ControllerRun {
  std::string name;
  metrics::TrajectoryLog log;
  metrics::MetricsReport report;
};

struct ComparisonReport {
  std::vector<ControllerRun> runs;
};

// Runs every controller under the identical wind realization and plan.
ComparisonReport run_comparison(const ScenarioConfig& base,
                                const std::vector<Controller>& controllers);

// Deterministic trajectory export; per-step solver wall times go to a
// separate timing file so repeated runs stay byte-identical.
void save_log_csv(const metrics::TrajectoryLog& log, const std::string& path);
void save_timing_csv(const metrics::TrajectoryLog& log, const std::string& path);
void save_metrics_report(const metrics::MetricsReport& report, const std::string& name,
                         const metrics::TrajectoryLog& log, const std::string& path);

}  // namespace wti::sim
