#include "wti/ocp.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>

#include "wti/errors.hpp"

namespace wti::ocp {

using dynamics::ControlInput;
using dynamics::State;
using dynamics::StateVec;

SolverConfig SolverConfig::for_vehicle(const dynamics::VehicleParams& params) {
  SolverConfig cfg;
  const double rate = 100.0 * M_PI / 180.0;
  cfg.control_lower = Eigen::Vector4d(-rate, -rate, -rate, 0.3 * params.hover_thrust());
  cfg.control_upper = Eigen::Vector4d(rate, rate, rate, 2.0 * params.hover_thrust());
  return cfg;
}

void SolverConfig::validate() const {
  if (horizon < 1) throw ConfigError("solver config: horizon must be >= 1");
  if (!(stage_duration > 0.0)) throw ConfigError("solver config: stage_duration must be > 0");
  if (((control_upper - control_lower).array() < 0.0).any()) {
    throw ConfigError("solver config: control bounds must satisfy lower <= upper");
  }
}

namespace {

constexpr double kFdStep = 1e-6;

Eigen::Vector4d clamp_control(const Eigen::Vector4d& u, const SolverConfig& cfg) {
  return u.cwiseMax(cfg.control_lower).cwiseMin(cfg.control_upper);
}

}  // namespace

struct RtiSolver::Workspace {
  std::vector<dynamics::StateMat> a;  // per stage
  std::vector<dynamics::InputMat> b;
  std::vector<StateVec> defect;
  Eigen::MatrixXd stage_jac_x;   // stage_dim x 10
  Eigen::MatrixXd stage_jac_u;   // stage_dim x 4
  Eigen::MatrixXd term_jac_x;    // terminal_dim x 10
  Eigen::VectorXd residual;      // stage_dim
  Eigen::VectorXd residual_hi, residual_lo;
  Eigen::MatrixXd sens;          // 10 x 4N state sensitivity to controls
  Eigen::MatrixXd row;           // stage_dim x (4N)
  Eigen::MatrixXd hessian;       // 4N x 4N
  Eigen::VectorXd gradient;      // 4N
  Eigen::VectorXd lower, upper;  // 4N
  std::vector<StateVec> carry;   // c_k, k = 0..N
  std::vector<int> last_active;  // QP active set carried across calls
};

RtiSolver::RtiSolver(const SolverConfig& config, const dynamics::VehicleParams& params)
    : config_(config), params_(params), work_(std::make_unique<Workspace>()) {
  config_.validate();
}

RtiSolver::~RtiSolver() = default;
RtiSolver::RtiSolver(RtiSolver&&) noexcept = default;
RtiSolver& RtiSolver::operator=(RtiSolver&&) noexcept = default;

OcpSolution RtiSolver::initial_solution(const State& x0) const {
  std::vector<ControlInput> controls(
      config_.horizon,
      ControlInput::from_vec(clamp_control(
          Eigen::Vector4d(0, 0, 0, params_.hover_thrust()), config_)));
  return rollout_solution(x0, controls);
}

OcpSolution RtiSolver::rollout_solution(const State& x0,
                                        const std::vector<ControlInput>& controls) const {
  if (static_cast<int>(controls.size()) != config_.horizon) {
    throw SolverError("rollout_solution: control count must equal the horizon");
  }
  OcpSolution sol;
  sol.controls = controls;
  sol.states.resize(config_.horizon + 1);
  sol.states[0] = x0;
  for (int k = 0; k < config_.horizon; ++k) {
    sol.states[k + 1] = dynamics::integrate_step(sol.states[k], controls[k],
                                                 Eigen::Vector3d::Zero(), params_,
                                                 config_.stage_duration);
  }
  return sol;
}

OcpSolution RtiSolver::shift_warm_start(const OcpSolution& solution) {
  OcpSolution shifted = solution;
  const std::size_t n_states = solution.states.size();
  for (std::size_t k = 0; k + 1 < n_states; ++k) {
    shifted.states[k] = solution.states[k + 1];
  }
  const std::size_t n_controls = solution.controls.size();
  for (std::size_t k = 0; k + 1 < n_controls; ++k) {
    shifted.controls[k] = solution.controls[k + 1];
  }
  return shifted;
}

double RtiSolver::objective_value(const ResidualModel& model, const OcpSolution& sol) const {
  Eigen::VectorXd r(model.stage_dim);
  double total = 0.0;
  for (int k = 0; k < config_.horizon; ++k) {
    model.stage(sol.states[k], sol.controls[k], k, r);
    total += r.squaredNorm();
  }
  Eigen::VectorXd rt(model.terminal_dim);
  model.terminal(sol.states[config_.horizon], rt);
  total += rt.squaredNorm();
  return 0.5 * total;
}

void RtiSolver::build(const State& measured, const ResidualModel& model,
                      const OcpSolution& warm, Workspace& ws) const {
  const int N = config_.horizon;
  const int nv = 4 * N;
  const int m = model.stage_dim;
  const double dt = config_.stage_duration;

  if (static_cast<int>(warm.states.size()) != N + 1 ||
      static_cast<int>(warm.controls.size()) != N) {
    throw SolverError("rti_step: warm start dimensions do not match the configuration");
  }

  ws.a.resize(N);
  ws.b.resize(N);
  ws.defect.resize(N);
  ws.stage_jac_x.resize(m, 10);
  ws.stage_jac_u.resize(m, 4);
  ws.term_jac_x.resize(model.terminal_dim, 10);
  ws.residual.resize(m);
  ws.residual_hi.resize(std::max(m, model.terminal_dim));
  ws.residual_lo.resize(std::max(m, model.terminal_dim));
  ws.sens.setZero(10, nv);
  ws.row.setZero(m, nv);
  ws.hessian.setZero(nv, nv);
  ws.gradient.setZero(nv);
  ws.lower.resize(nv);
  ws.upper.resize(nv);
  ws.carry.resize(N + 1);

  // Hemisphere continuity: a measurement on the far cover of the warm start
  // is differenced after flipping the warm trajectory.
  std::vector<State> nodes = warm.states;
  if (measured.attitude.coeffs().dot(nodes[0].attitude.coeffs()) < 0.0) {
    for (auto& s : nodes) s.attitude.coeffs() = -s.attitude.coeffs();
  }
  std::vector<ControlInput> controls = warm.controls;
  for (auto& u : controls) u = ControlInput::from_vec(clamp_control(u.to_vec(), config_));

  ws.carry[0] = measured.to_vec() - nodes[0].to_vec();

  const Eigen::Vector3d no_wind = Eigen::Vector3d::Zero();
  for (int k = 0; k < N; ++k) {
    dynamics::linearize_step(nodes[k], controls[k], no_wind, params_, dt, ws.a[k], ws.b[k]);
    const State propagated = dynamics::integrate_step(nodes[k], controls[k], no_wind, params_, dt);
    ws.defect[k] = propagated.to_vec() - nodes[k + 1].to_vec();

    // Stage residual and central-difference Jacobians.
    model.stage(nodes[k], controls[k], k, ws.residual);
    const StateVec xk = nodes[k].to_vec();
    for (int i = 0; i < 10; ++i) {
      const double h = kFdStep * (1.0 + std::abs(xk(i)));
      StateVec xp = xk;
      xp(i) += h;
      model.stage(State::from_vec(xp), controls[k], k, ws.residual_hi.head(m));
      xp(i) = xk(i) - h;
      model.stage(State::from_vec(xp), controls[k], k, ws.residual_lo.head(m));
      ws.stage_jac_x.col(i) = (ws.residual_hi.head(m) - ws.residual_lo.head(m)) / (2.0 * h);
    }
    const Eigen::Vector4d uk = controls[k].to_vec();
    for (int i = 0; i < 4; ++i) {
      const double h = kFdStep * (1.0 + std::abs(uk(i)));
      Eigen::Vector4d up = uk;
      up(i) += h;
      model.stage(nodes[k], ControlInput::from_vec(up), k, ws.residual_hi.head(m));
      up(i) = uk(i) - h;
      model.stage(nodes[k], ControlInput::from_vec(up), k, ws.residual_lo.head(m));
      ws.stage_jac_u.col(i) = (ws.residual_hi.head(m) - ws.residual_lo.head(m)) / (2.0 * h);
    }

    if (!ws.stage_jac_x.allFinite() || !ws.stage_jac_u.allFinite() ||
        !ws.residual.allFinite()) {
      throw SolverError("rti_step: non-finite residual linearization");
    }

    // Row block k of the condensed Jacobian: only the first 4k+4 columns are
    // populated, which keeps the normal-equation update O(k^2).
    const int width = 4 * k + 4;
    if (k > 0) {
      ws.row.leftCols(4 * k).noalias() = ws.stage_jac_x * ws.sens.leftCols(4 * k);
    }
    ws.row.middleCols(4 * k, 4) = ws.stage_jac_u;
    const Eigen::VectorXd shifted_residual = ws.residual + ws.stage_jac_x * ws.carry[k];
    auto row_block = ws.row.leftCols(width);
    ws.hessian.topLeftCorner(width, width)
        .selfadjointView<Eigen::Lower>()
        .rankUpdate(row_block.transpose());
    ws.gradient.head(width).noalias() += row_block.transpose() * shifted_residual;

    // Propagate the sensitivity and the linearization-point carry.
    ws.carry[k + 1] = ws.a[k] * ws.carry[k] + ws.defect[k];
    if (k > 0) {
      ws.sens.leftCols(4 * k) = (ws.a[k] * ws.sens.leftCols(4 * k)).eval();
    }
    ws.sens.middleCols(4 * k, 4) = ws.b[k];

    // Bounds on the correction for this stage.
    ws.lower.segment<4>(4 * k) = config_.control_lower - uk;
    ws.upper.segment<4>(4 * k) = config_.control_upper - uk;
  }

  // Terminal block.
  {
    const int mt = model.terminal_dim;
    model.terminal(nodes[N], ws.residual_hi.head(mt));
    Eigen::VectorXd rho = ws.residual_hi.head(mt);
    const StateVec xn = nodes[N].to_vec();
    for (int i = 0; i < 10; ++i) {
      const double h = kFdStep * (1.0 + std::abs(xn(i)));
      StateVec xp = xn;
      xp(i) += h;
      model.terminal(State::from_vec(xp), ws.residual_hi.head(mt));
      xp(i) = xn(i) - h;
      model.terminal(State::from_vec(xp), ws.residual_lo.head(mt));
      ws.term_jac_x.col(i) = (ws.residual_hi.head(mt) - ws.residual_lo.head(mt)) / (2.0 * h);
    }
    if (!ws.term_jac_x.allFinite() || !rho.allFinite()) {
      throw SolverError("rti_step: non-finite terminal linearization");
    }
    Eigen::MatrixXd term_row = ws.term_jac_x * ws.sens;
    rho += ws.term_jac_x * ws.carry[N];
    ws.hessian.selfadjointView<Eigen::Lower>().rankUpdate(term_row.transpose());
    ws.gradient.noalias() += term_row.transpose() * rho;
  }

  ws.hessian.triangularView<Eigen::StrictlyUpper>() = ws.hessian.transpose();
  ws.hessian.diagonal().array() += config_.levenberg;
}

CondensedQp RtiSolver::assemble(const State& measured, const ResidualModel& model,
                                const OcpSolution& warm) const {
  Workspace ws;
  build(measured, model, warm, ws);
  return {ws.hessian, ws.gradient, ws.lower, ws.upper};
}

std::pair<ControlInput, OcpSolution> RtiSolver::step(const State& measured,
                                                     const ResidualModel& model,
                                                     const OcpSolution& warm) {
  const auto t_start = std::chrono::steady_clock::now();
  const int N = config_.horizon;

  Workspace& ws = *work_;
  build(measured, model, warm, ws);

  const BoxQpResult qp =
      solve_box_qp(ws.hessian, ws.gradient, ws.lower, ws.upper, config_.max_qp_iterations,
                   config_.qp_tolerance, &ws.last_active);
  ws.last_active = qp.active;

  OcpSolution sol;
  sol.states.resize(N + 1);
  sol.controls.resize(N);
  sol.qp_iterations = qp.iterations;
  sol.degraded = !qp.converged;

  // Full step on controls; variables the QP pinned to a bound are assigned
  // the bound value itself so the constraint holds exactly.
  std::vector<ControlInput> warm_controls = warm.controls;
  for (auto& u : warm_controls) u = ControlInput::from_vec(clamp_control(u.to_vec(), config_));
  for (int k = 0; k < N; ++k) {
    Eigen::Vector4d u = warm_controls[k].to_vec() + qp.x.segment<4>(4 * k);
    for (int i = 0; i < 4; ++i) {
      const int flag = qp.active[4 * k + i];
      if (flag < 0) u(i) = config_.control_lower(i);
      if (flag > 0) u(i) = config_.control_upper(i);
    }
    sol.controls[k] = ControlInput::from_vec(clamp_control(u, config_));
  }

  // Full step on the shooting nodes via the linearized dynamics.
  std::vector<State> nodes = warm.states;
  if (measured.attitude.coeffs().dot(nodes[0].attitude.coeffs()) < 0.0) {
    for (auto& s : nodes) s.attitude.coeffs() = -s.attitude.coeffs();
  }
  StateVec dx = ws.carry[0];
  sol.states[0] = measured;
  for (int k = 0; k < N; ++k) {
    dx = ws.a[k] * dx + ws.b[k] * qp.x.segment<4>(4 * k) + ws.defect[k];
    State next = State::from_vec(nodes[k + 1].to_vec() + dx);
    next.normalize_attitude();
    sol.states[k + 1] = next;
  }

  sol.objective = objective_value(model, sol);
  sol.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {sol.controls[0], sol};
}

BoxQpResult solve_box_qp(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& gradient,
                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         int max_iterations, double tolerance,
                         const std::vector<int>* initial_active) {
  const int n = static_cast<int>(gradient.size());
  BoxQpResult result;
  result.x = Eigen::VectorXd::Zero(n);
  result.active.assign(n, 0);
  if (initial_active != nullptr && static_cast<int>(initial_active->size()) == n) {
    for (int j = 0; j < n; ++j) {
      const int side = (*initial_active)[j];
      if (side < 0) {
        result.active[j] = -1;
        result.x(j) = lower(j);
      } else if (side > 0) {
        result.active[j] = 1;
        result.x(j) = upper(j);
      }
    }
  }

  Eigen::VectorXd grad(n), direction(n);
  std::vector<int> free_index;
  free_index.reserve(n);

  for (int iter = 0; iter < std::max(1, max_iterations); ++iter) {
    result.iterations = iter + 1;
    grad = gradient;
    grad.noalias() += hessian * result.x;

    free_index.clear();
    for (int j = 0; j < n; ++j) {
      if (result.active[j] == 0) free_index.push_back(j);
    }

    double step_norm = 0.0;
    direction.setZero();
    if (!free_index.empty()) {
      const int nf = static_cast<int>(free_index.size());
      Eigen::MatrixXd hff(nf, nf);
      Eigen::VectorXd gf(nf);
      for (int a = 0; a < nf; ++a) {
        gf(a) = grad(free_index[a]);
        for (int b = 0; b < nf; ++b) hff(a, b) = hessian(free_index[a], free_index[b]);
      }
      const Eigen::VectorXd df = hff.llt().solve(-gf);
      for (int a = 0; a < nf; ++a) direction(free_index[a]) = df(a);
      step_norm = df.lpNorm<Eigen::Infinity>();
    }

    if (step_norm <= tolerance) {
      // KKT multiplier check on the active bounds.
      int release = -1;
      double worst = tolerance;
      for (int j = 0; j < n; ++j) {
        double violation = 0.0;
        if (result.active[j] < 0) violation = -grad(j);  // lower bound wants grad >= 0
        if (result.active[j] > 0) violation = grad(j);   // upper bound wants grad <= 0
        if (violation > worst) {
          worst = violation;
          release = j;
        }
      }
      if (release < 0) {
        result.converged = true;
        return result;
      }
      result.active[release] = 0;
      continue;
    }

    // Step to the nearest blocking bound.
    double alpha = 1.0;
    int blocker = -1;
    int blocker_side = 0;
    for (int j : free_index) {
      const double d = direction(j);
      if (d > 1e-16) {
        const double a = (upper(j) - result.x(j)) / d;
        if (a < alpha) {
          alpha = a;
          blocker = j;
          blocker_side = 1;
        }
      } else if (d < -1e-16) {
        const double a = (lower(j) - result.x(j)) / d;
        if (a < alpha) {
          alpha = a;
          blocker = j;
          blocker_side = -1;
        }
      }
    }
    alpha = std::clamp(alpha, 0.0, 1.0);
    for (int j : free_index) result.x(j) += alpha * direction(j);
    if (blocker >= 0) {
      result.x(blocker) = blocker_side > 0 ? upper(blocker) : lower(blocker);
      result.active[blocker] = blocker_side;
    }
  }
  return result;  // iteration cap hit; caller flags the solution degraded
}

}  // namespace wti::ocp
