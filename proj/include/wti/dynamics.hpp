#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace wti::dynamics {

using StateVec = Eigen::Matrix<double, 10, 1>;
using StateMat = Eigen::Matrix<double, 10, 10>;
using InputMat = Eigen::Matrix<double, 10, 4>;

// 10-state rigid body: inertial position, body-frame velocity, attitude
// quaternion (body to inertial, Hamilton, stored x,y,z,w in the flat vector).
struct State {
  Eigen::Vector3d position{0, 0, 0};
  Eigen::Vector3d velocity{0, 0, 0};
  Eigen::Quaterniond attitude{1, 0, 0, 0};  // (w, x, y, z) constructor order

  StateVec to_vec() const;
  static State from_vec(const StateVec& v);
  void normalize_attitude() { attitude.normalize(); }
};

struct ControlInput {
  Eigen::Vector3d body_rates{0, 0, 0};  // p, q, r [rad/s]
  double thrust = 0.0;                  // collective [N]

  Eigen::Vector4d to_vec() const {
    return {body_rates.x(), body_rates.y(), body_rates.z(), thrust};
  }
  static ControlInput from_vec(const Eigen::Vector4d& v) {
    return {{v(0), v(1), v(2)}, v(3)};
  }
};

struct VehicleParams {
  double mass = 1.09;     // kg
  double gravity = 9.81;  // m/s^2

  double hover_thrust() const { return mass * gravity; }
};

// Sinusoidal gust about a mean, expressed as an acceleration on the plant:
// a(t) = drag_gain/mass * (mean + sqrt(2)*std*sin(2*pi*t/period)) * direction.
// The default coupling is calibrated so a 4 m/s mean produces the reported
// full-scale stand-off fluctuation bands (roughly +-0.6 m for the
// visual-tracking controller, past the 1 m margin for the baseline).
struct WindModel {
  double mean_speed = 0.0;      // m/s
  double sinusoid_period = 10.0;  // s
  double sinusoid_std = 0.5;    // m/s
  Eigen::Vector3d direction{0, 1, 0};
  double drag_gain = 1.0;  // N*s/m
};

// Applies a quaternion as the homogeneous bilinear form, valid for non-unit
// quaternions up to scale; the Jacobians below differentiate exactly this
// form so finite-difference checks line up off the unit sphere too.
Eigen::Vector3d rotate(const Eigen::Quaterniond& q, const Eigen::Vector3d& a);
Eigen::Vector3d rotate_inverse(const Eigen::Quaterniond& q, const Eigen::Vector3d& a);

// Continuous-time model, Newton-Euler point mass with thrust along body z.
// external_accel is inertial (the wind coupling).
StateVec state_derivative(const State& state, const ControlInput& control,
                          const Eigen::Vector3d& external_accel, const VehicleParams& params);

// Analytic Jacobians of state_derivative w.r.t. the flat state and control.
void linearize_derivative(const State& state, const ControlInput& control,
                          const Eigen::Vector3d& external_accel, const VehicleParams& params,
                          StateMat& dfdx, InputMat& dfdu);

// Classic RK4 step with zero-order-hold control, attitude renormalized at the
// end. dt must lie in (0, 0.05]. Throws SolverError on non-finite output.
State integrate_step(const State& state, const ControlInput& control,
                     const Eigen::Vector3d& external_accel, const VehicleParams& params,
                     double dt);

// Exact Jacobians of the RK4 map (renormalization excluded).
void linearize_step(const State& state, const ControlInput& control,
                    const Eigen::Vector3d& external_accel, const VehicleParams& params,
                    double dt, StateMat& A, InputMat& B);

Eigen::Vector3d wind_accel(double t, const WindModel& wind, double mass);

}  // namespace wti::dynamics
