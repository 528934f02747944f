#include "wti/dynamics.hpp"

#include <cmath>

#include "wti/errors.hpp"

namespace wti::dynamics {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// d(rotate(q, a))/dq as a 3x4 block, columns ordered (qx, qy, qz, qw).
Eigen::Matrix<double, 3, 4> rotate_jacobian_q(const Eigen::Quaterniond& q,
                                              const Eigen::Vector3d& a) {
  const Eigen::Vector3d v = q.vec();
  const double w = q.w();
  Eigen::Matrix<double, 3, 4> j;
  j.leftCols<3>() = -2.0 * a * v.transpose() + 2.0 * v.dot(a) * Eigen::Matrix3d::Identity() +
                    2.0 * v * a.transpose() - 2.0 * w * skew(a);
  j.col(3) = 2.0 * w * a + 2.0 * v.cross(a);
  return j;
}

Eigen::Matrix<double, 3, 4> rotate_inverse_jacobian_q(const Eigen::Quaterniond& q,
                                                      const Eigen::Vector3d& a) {
  const Eigen::Vector3d v = q.vec();
  const double w = q.w();
  Eigen::Matrix<double, 3, 4> j;
  j.leftCols<3>() = -2.0 * a * v.transpose() + 2.0 * v.dot(a) * Eigen::Matrix3d::Identity() +
                    2.0 * v * a.transpose() + 2.0 * w * skew(a);
  j.col(3) = 2.0 * w * a - 2.0 * v.cross(a);
  return j;
}

}  // namespace

StateVec State::to_vec() const {
  StateVec v;
  v.segment<3>(0) = position;
  v.segment<3>(3) = velocity;
  v(6) = attitude.x();
  v(7) = attitude.y();
  v(8) = attitude.z();
  v(9) = attitude.w();
  return v;
}

State State::from_vec(const StateVec& v) {
  State s;
  s.position = v.segment<3>(0);
  s.velocity = v.segment<3>(3);
  s.attitude = Eigen::Quaterniond(v(9), v(6), v(7), v(8));
  return s;
}

Eigen::Vector3d rotate(const Eigen::Quaterniond& q, const Eigen::Vector3d& a) {
  const Eigen::Vector3d v = q.vec();
  const double w = q.w();
  return (w * w - v.squaredNorm()) * a + 2.0 * v.dot(a) * v + 2.0 * w * v.cross(a);
}

Eigen::Vector3d rotate_inverse(const Eigen::Quaterniond& q, const Eigen::Vector3d& a) {
  const Eigen::Vector3d v = q.vec();
  const double w = q.w();
  return (w * w - v.squaredNorm()) * a + 2.0 * v.dot(a) * v - 2.0 * w * v.cross(a);
}

StateVec state_derivative(const State& state, const ControlInput& control,
                          const Eigen::Vector3d& external_accel, const VehicleParams& params) {
  const Eigen::Quaterniond& q = state.attitude;
  const Eigen::Vector3d& vel = state.velocity;
  const Eigen::Vector3d& omega = control.body_rates;

  StateVec dot;
  dot.segment<3>(0) = rotate(q, vel);

  const Eigen::Vector3d body_forces =
      rotate_inverse(q, Eigen::Vector3d(0, 0, -params.gravity) + external_accel);
  dot.segment<3>(3) = vel.cross(omega) + body_forces +
                      Eigen::Vector3d(0, 0, control.thrust / params.mass);

  const double p = omega.x(), r_q = omega.y(), r = omega.z();
  dot(6) = 0.5 * (p * q.w() + r * q.y() - r_q * q.z());
  dot(7) = 0.5 * (r_q * q.w() - r * q.x() + p * q.z());
  dot(8) = 0.5 * (r * q.w() + r_q * q.x() - p * q.y());
  dot(9) = -0.5 * (p * q.x() + r_q * q.y() + r * q.z());
  return dot;
}

void linearize_derivative(const State& state, const ControlInput& control,
                          const Eigen::Vector3d& external_accel, const VehicleParams& params,
                          StateMat& dfdx, InputMat& dfdu) {
  const Eigen::Quaterniond& q = state.attitude;
  const Eigen::Vector3d& vel = state.velocity;
  const Eigen::Vector3d& omega = control.body_rates;

  dfdx.setZero();
  dfdu.setZero();

  // Position kinematics.
  const Eigen::Vector3d v3 = q.vec();
  const double w = q.w();
  Eigen::Matrix3d rot;
  rot = (w * w - v3.squaredNorm()) * Eigen::Matrix3d::Identity() +
        2.0 * v3 * v3.transpose() + 2.0 * w * skew(v3);
  dfdx.block<3, 3>(0, 3) = rot;
  dfdx.block<3, 4>(0, 6) = rotate_jacobian_q(q, vel);

  // Body-frame translational dynamics.
  const Eigen::Vector3d accel_in = Eigen::Vector3d(0, 0, -params.gravity) + external_accel;
  dfdx.block<3, 3>(3, 3) = -skew(omega);
  dfdx.block<3, 4>(3, 6) = rotate_inverse_jacobian_q(q, accel_in);
  dfdu.block<3, 3>(3, 0) = skew(vel);
  dfdu(5, 3) = 1.0 / params.mass;

  // Quaternion kinematics.
  const double p = omega.x(), r_q = omega.y(), r = omega.z();
  Eigen::Matrix4d dq;
  dq << 0, r, -r_q, p,
       -r, 0, p, r_q,
        r_q, -p, 0, r,
       -p, -r_q, -r, 0;
  dfdx.block<4, 4>(6, 6) = 0.5 * dq;

  Eigen::Matrix<double, 4, 3> domega;
  domega << q.w(), -q.z(), q.y(),
            q.z(), q.w(), -q.x(),
           -q.y(), q.x(), q.w(),
           -q.x(), -q.y(), -q.z();
  dfdu.block<4, 3>(6, 0) = 0.5 * domega;
}

State integrate_step(const State& state, const ControlInput& control,
                     const Eigen::Vector3d& external_accel, const VehicleParams& params,
                     double dt) {
  if (!(dt > 0.0) || dt > 0.05) {
    throw SolverError("integrate_step: dt must lie in (0, 0.05]");
  }
  const StateVec x0 = state.to_vec();
  const StateVec k1 = state_derivative(state, control, external_accel, params);
  const StateVec k2 =
      state_derivative(State::from_vec(x0 + 0.5 * dt * k1), control, external_accel, params);
  const StateVec k3 =
      state_derivative(State::from_vec(x0 + 0.5 * dt * k2), control, external_accel, params);
  const StateVec k4 =
      state_derivative(State::from_vec(x0 + dt * k3), control, external_accel, params);

  const StateVec x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!x1.allFinite()) {
    throw SolverError("integrate_step: non-finite state");
  }
  State next = State::from_vec(x1);
  next.normalize_attitude();
  return next;
}

void linearize_step(const State& state, const ControlInput& control,
                    const Eigen::Vector3d& external_accel, const VehicleParams& params,
                    double dt, StateMat& A, InputMat& B) {
  const StateVec x0 = state.to_vec();

  StateMat a1, a2, a3, a4;
  InputMat b1, b2, b3, b4;

  const StateVec k1 = state_derivative(state, control, external_accel, params);
  linearize_derivative(state, control, external_accel, params, a1, b1);

  const State s2 = State::from_vec(x0 + 0.5 * dt * k1);
  const StateVec k2 = state_derivative(s2, control, external_accel, params);
  linearize_derivative(s2, control, external_accel, params, a2, b2);
  const StateMat k2x = a2 * (StateMat::Identity() + 0.5 * dt * a1);
  const InputMat k2u = a2 * (0.5 * dt * b1) + b2;

  const State s3 = State::from_vec(x0 + 0.5 * dt * k2);
  const StateVec k3 = state_derivative(s3, control, external_accel, params);
  linearize_derivative(s3, control, external_accel, params, a3, b3);
  const StateMat k3x = a3 * (StateMat::Identity() + 0.5 * dt * k2x);
  const InputMat k3u = a3 * (0.5 * dt * k2u) + b3;

  const State s4 = State::from_vec(x0 + dt * k3);
  linearize_derivative(s4, control, external_accel, params, a4, b4);
  const StateMat k4x = a4 * (StateMat::Identity() + dt * k3x);
  const InputMat k4u = a4 * (dt * k3u) + b4;

  A = StateMat::Identity() + (dt / 6.0) * (a1 + 2.0 * k2x + 2.0 * k3x + k4x);
  B = (dt / 6.0) * (b1 + 2.0 * k2u + 2.0 * k3u + k4u);
}

Eigen::Vector3d wind_accel(double t, const WindModel& wind, double mass) {
  const double speed =
      wind.mean_speed +
      std::sqrt(2.0) * wind.sinusoid_std * std::sin(2.0 * M_PI * t / wind.sinusoid_period);
  return (wind.drag_gain / mass) * speed * wind.direction;
}

}  // namespace wti::dynamics
