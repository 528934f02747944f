#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "wti/dynamics.hpp"

namespace wti::ocp {

struct SolverConfig {
  int horizon = 30;  // shooting stages
  // Prediction grid per stage. The control loop re-solves faster than this
  // (see ScenarioConfig::control_period); on the drag-free plant a
  // sub-second prediction horizon cannot damp the translational modes, so
  // the 30 stages span 1.5 s.
  double stage_duration = 0.05;  // s
  Eigen::Vector4d control_lower{-100.0 * M_PI / 180.0, -100.0 * M_PI / 180.0,
                                -100.0 * M_PI / 180.0, 0.0};
  Eigen::Vector4d control_upper{100.0 * M_PI / 180.0, 100.0 * M_PI / 180.0,
                                100.0 * M_PI / 180.0, 0.0};
  int max_qp_iterations = 300;
  double qp_tolerance = 1e-8;
  double levenberg = 1e-8;

  // Rate bounds of +-100 deg/s and thrust within [0.3, 2] m g.
  static SolverConfig for_vehicle(const dynamics::VehicleParams& params);
  void validate() const;
};

// Least-squares residual stack: a weighted stage residual per shooting stage
// plus a terminal residual. Residual Jacobians are taken by central finite
// differences inside the solver.
struct ResidualModel {
  int stage_dim = 0;
  int terminal_dim = 0;
  std::function<void(const dynamics::State&, const dynamics::ControlInput&, int,
                     Eigen::Ref<Eigen::VectorXd>)>
      stage;
  std::function<void(const dynamics::State&, Eigen::Ref<Eigen::VectorXd>)> terminal;
};

struct OcpSolution {
  std::vector<dynamics::State> states;          // N+1 shooting nodes
  std::vector<dynamics::ControlInput> controls;  // N stages
  double objective = 0.0;  // 0.5 * sum of squared residuals at the solution
  int qp_iterations = 0;
  double solve_time = 0.0;  // s
  bool degraded = false;    // QP hit its iteration cap
};

// Condensed Gauss-Newton QP over the stacked control corrections.
struct CondensedQp {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Eigen::VectorXd lower;  // bounds on the correction, per variable
  Eigen::VectorXd upper;
};

// One real-time iteration per call: linearize along the warm start, condense,
// solve the box QP, apply the full step. One instance per control loop; not
// safe for concurrent calls.
class RtiSolver {
 public:
  RtiSolver(const SolverConfig& config, const dynamics::VehicleParams& params);
  ~RtiSolver();
  RtiSolver(RtiSolver&&) noexcept;
  RtiSolver& operator=(RtiSolver&&) noexcept;

  // Hover-control rollout from x0, the canonical cold start.
  OcpSolution initial_solution(const dynamics::State& x0) const;
  OcpSolution rollout_solution(const dynamics::State& x0,
                               const std::vector<dynamics::ControlInput>& controls) const;

  std::pair<dynamics::ControlInput, OcpSolution> step(const dynamics::State& measured,
                                                      const ResidualModel& model,
                                                      const OcpSolution& warm);

  // The QP rti would solve from this warm start; exposed for verification.
  CondensedQp assemble(const dynamics::State& measured, const ResidualModel& model,
                       const OcpSolution& warm) const;

  double objective_value(const ResidualModel& model, const OcpSolution& solution) const;

  static OcpSolution shift_warm_start(const OcpSolution& solution);

  const SolverConfig& config() const { return config_; }
  const dynamics::VehicleParams& vehicle() const { return params_; }

 private:
  struct Workspace;

  void build(const dynamics::State& measured, const ResidualModel& model,
             const OcpSolution& warm, Workspace& ws) const;

  SolverConfig config_;
  dynamics::VehicleParams params_;
  std::unique_ptr<Workspace> work_;  // reused across calls, one loop per instance
};

struct BoxQpResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  std::vector<int> active;  // -1 at lower, +1 at upper, 0 free
};

// Primal active-set method for min 0.5 x'Hx + g'x, lb <= x <= ub, H positive
// definite. Starts from x = 0 (assumed feasible) unless a previous active set
// is supplied, in which case those variables start pinned at their bounds.
BoxQpResult solve_box_qp(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& gradient,
                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         int max_iterations, double tolerance,
                         const std::vector<int>* initial_active = nullptr);

}  // namespace wti::ocp
