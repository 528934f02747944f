#include "wti/controllers.hpp"

#include <algorithm>
#include <cmath>

#include "wti/errors.hpp"

namespace wti::control {

namespace {

constexpr double kPlanarEps = 1e-6;

Eigen::Vector2d planar_offset(const dynamics::State& state, const Eigen::Vector3d& p) {
  return (state.position - p).head<2>();
}

}  // namespace

double heading_function(const dynamics::State& state, const Eigen::Vector3d& p) {
  const Eigen::Vector2d to_point = -planar_offset(state, p);
  const double a_norm = to_point.norm();
  if (a_norm <= kPlanarEps) {
    throw DegenerateGeometry("heading_function: drone is on the vertical through the point");
  }
  const Eigen::Vector3d forward = dynamics::rotate(state.attitude, Eigen::Vector3d::UnitX());
  const Eigen::Vector2d fwd_xy = forward.head<2>();
  const double f_norm = fwd_xy.norm();
  if (f_norm <= kPlanarEps) {
    throw DegenerateGeometry("heading_function: body forward axis is vertical");
  }
  return fwd_xy.dot(to_point) / (f_norm * a_norm);
}

double distance_function(const dynamics::State& state, const Eigen::Vector3d& p) {
  return planar_offset(state, p).norm();
}

double roi_function(const dynamics::State& state, const Eigen::Vector3d& p,
                    const Eigen::Vector3d& n) {
  return planar_offset(state, p).dot(n.head<2>());
}

double orthogonality_function(const dynamics::State& state, const Eigen::Vector3d& p,
                              const Eigen::Vector3d& n) {
  const Eigen::Vector3d a = state.position - p;
  return (a - a.dot(n) * n).norm();
}

Eigen::Matrix<double, kResidualDim, 1> vt_nmpc_residuals(const dynamics::State& state,
                                                         const dynamics::ControlInput& control,
                                                         const StageReference& ref,
                                                         const ControllerWeights& weights,
                                                         const VisualReferences& vrefs,
                                                         const dynamics::VehicleParams& params) {
  Eigen::Matrix<double, kResidualDim, 1> r;
  r(0) = std::sqrt(weights.heading) *
         (heading_function(state, ref.point) - VisualReferences::h_ref);
  r(1) = std::sqrt(weights.distance) * (distance_function(state, ref.point) - vrefs.d_ref);
  r(2) = std::sqrt(weights.roi) *
         (roi_function(state, ref.point, ref.normal_xy) - vrefs.r_ref());
  r(3) = std::sqrt(weights.ortho) *
         (orthogonality_function(state, ref.point, ref.normal_xy) - VisualReferences::o_ref);

  r(4) = std::sqrt(weights.state(0)) * (state.velocity.x() - ref.body_velocity_ref.x());
  r(5) = std::sqrt(weights.state(1)) * (state.velocity.y() - ref.body_velocity_ref.y());
  r(6) = std::sqrt(weights.state(2)) * (state.velocity.z() - ref.body_velocity_ref.z());
  r(7) = std::sqrt(weights.state(3)) * state.attitude.x();
  r(8) = std::sqrt(weights.state(4)) * state.attitude.y();

  r(9) = std::sqrt(weights.control(0)) * control.body_rates.x();
  r(10) = std::sqrt(weights.control(1)) * control.body_rates.y();
  r(11) = std::sqrt(weights.control(2)) * control.body_rates.z();
  r(12) = std::sqrt(weights.control(3)) * (control.thrust - params.hover_thrust());
  return r;
}

Eigen::Matrix<double, kResidualDim, 1> baseline_nmpc_residuals(
    const dynamics::State& state, const dynamics::ControlInput& control,
    const BaselineReference& ref, const ControllerWeights& weights,
    const dynamics::VehicleParams& params) {
  Eigen::Matrix<double, kResidualDim, 1> r;
  const Eigen::Vector3d pos_err = state.position - ref.position_ref;
  r(0) = std::sqrt(weights.baseline_position(0)) * pos_err.x();
  r(1) = std::sqrt(weights.baseline_position(1)) * pos_err.y();
  r(2) = std::sqrt(weights.baseline_position(2)) * pos_err.z();

  // z-component of q (x) conj(q_yaw_ref): ~sin((yaw - yaw_ref)/2) in level
  // flight, smooth through the +-pi seam.
  const double half = 0.5 * ref.yaw_ref;
  r(3) = std::sqrt(weights.baseline_yaw) *
         (state.attitude.z() * std::cos(half) - state.attitude.w() * std::sin(half));

  r(4) = std::sqrt(weights.state(0)) * (state.velocity.x() - ref.body_velocity_ref.x());
  r(5) = std::sqrt(weights.state(1)) * (state.velocity.y() - ref.body_velocity_ref.y());
  r(6) = std::sqrt(weights.state(2)) * (state.velocity.z() - ref.body_velocity_ref.z());
  r(7) = std::sqrt(weights.state(3)) * state.attitude.x();
  r(8) = std::sqrt(weights.state(4)) * state.attitude.y();

  r(9) = std::sqrt(weights.control(0)) * control.body_rates.x();
  r(10) = std::sqrt(weights.control(1)) * control.body_rates.y();
  r(11) = std::sqrt(weights.control(2)) * control.body_rates.z();
  r(12) = std::sqrt(weights.control(3)) * (control.thrust - params.hover_thrust());
  return r;
}

Eigen::Matrix<double, 5, 1> terminal_residuals(const dynamics::State& state,
                                               const Eigen::Vector3d& body_velocity_ref,
                                               const ControllerWeights& weights) {
  Eigen::Matrix<double, 5, 1> r;
  const Eigen::Matrix<double, 5, 1> w = weights.terminal_scale * weights.state;
  r(0) = std::sqrt(w(0)) * (state.velocity.x() - body_velocity_ref.x());
  r(1) = std::sqrt(w(1)) * (state.velocity.y() - body_velocity_ref.y());
  r(2) = std::sqrt(w(2)) * (state.velocity.z() - body_velocity_ref.z());
  r(3) = std::sqrt(w(3)) * state.attitude.x();
  r(4) = std::sqrt(w(4)) * state.attitude.y();
  return r;
}

BaselineReference baseline_reference(const StageReference& stage, double d_ref) {
  BaselineReference ref;
  ref.position_ref = stage.point + d_ref * stage.normal_xy;
  // 0.0 - x avoids the negative-zero atan2 branch so a -x-facing reference
  // reads +pi rather than -pi.
  ref.yaw_ref = std::atan2(0.0 - stage.normal_xy.y(), 0.0 - stage.normal_xy.x());
  ref.body_velocity_ref = stage.body_velocity_ref;
  return ref;
}

double yaw_from_quaternion(const Eigen::Quaterniond& q) {
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()),
                    1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

ReferencePath::ReferencePath(std::vector<planner::InspectionPoint> points, double orbit_radius)
    : points_(std::move(points)) {
  if (points_.empty()) {
    throw PlanningError("ReferencePath: plan is empty");
  }
  if (!(orbit_radius >= 0.0)) {
    throw PlanningError("ReferencePath: orbit radius must be non-negative");
  }
  normals_xy_.reserve(points_.size());
  for (const auto& p : points_) {
    const double planar = p.normal.head<2>().norm();
    if (planar < 0.1) {
      throw PlanningError(
          "ReferencePath: near-vertical surface normal; the planar visual costs degenerate");
    }
    normals_xy_.push_back(Eigen::Vector3d(p.normal.x() / planar, p.normal.y() / planar, 0.0));
  }
  cumulative_.resize(points_.size(), 0.0);
  turn_angle_.resize(points_.size() > 1 ? points_.size() - 1 : 0, 0.0);
  transit_.resize(turn_angle_.size(), 0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double line = (points_[i].position - points_[i - 1].position).norm();
    double pacing = line;
    const bool transit = points_[i - 1].cluster_id != points_[i].cluster_id ||
                         points_[i - 1].phase != points_[i].phase;
    if (transit) {
      transit_[i - 1] = 1;
      const double from = std::atan2(normals_xy_[i - 1].y(), normals_xy_[i - 1].x());
      const double to = std::atan2(normals_xy_[i].y(), normals_xy_[i].x());
      turn_angle_[i - 1] = std::remainder(to - from, 2.0 * M_PI);
      pacing = std::max(line, std::abs(turn_angle_[i - 1]) * orbit_radius);
    }
    cumulative_[i] = cumulative_[i - 1] + pacing;
  }
  total_length_ = cumulative_.back();
}

ReferencePath::Sample ReferencePath::sample(double arc_length) const {
  Sample s;
  if (points_.size() == 1 || arc_length >= total_length_) {
    s.point = points_.back().position;
    s.normal_xy = normals_xy_.back();
    s.tangent.setZero();
    s.active_index = static_cast<int>(points_.size()) - 1;
    s.past_end = true;
    return s;
  }
  const double sa = std::max(0.0, arc_length);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), sa);
  std::size_t seg = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  seg = std::min(std::max<std::size_t>(seg, 1), points_.size() - 1) - 1;

  const double seg_len = cumulative_[seg + 1] - cumulative_[seg];
  const double frac = seg_len > 0.0 ? (sa - cumulative_[seg]) / seg_len : 0.0;
  s.point = points_[seg].position +
            frac * (points_[seg + 1].position - points_[seg].position);
  if (seg_len > 0.0) {
    s.tangent = (points_[seg + 1].position - points_[seg].position) / seg_len;
  } else {
    s.tangent.setZero();
  }
  if (turn_angle_[seg] != 0.0) {
    const double from = std::atan2(normals_xy_[seg].y(), normals_xy_[seg].x());
    const double angle = from + frac * turn_angle_[seg];
    s.normal_xy = Eigen::Vector3d(std::cos(angle), std::sin(angle), 0.0);
  } else {
    s.normal_xy = normals_xy_[seg];
  }
  s.active_index = static_cast<int>(seg) + (frac >= 1.0 ? 1 : 0);
  s.past_end = false;
  s.in_transit = transit_[seg] != 0;
  return s;
}

std::vector<StageReference> generate_references(const ReferencePath& path, double t,
                                                double progression_speed, int horizon,
                                                double dt, const dynamics::State& current) {
  std::vector<StageReference> refs;
  refs.reserve(horizon + 1);
  for (int k = 0; k <= horizon; ++k) {
    const double s = progression_speed * (t + k * dt);
    const auto sample = path.sample(s);
    StageReference ref;
    ref.point = sample.point;
    ref.normal_xy = sample.normal_xy;
    ref.body_velocity_ref =
        dynamics::rotate_inverse(current.attitude, progression_speed * sample.tangent);
    refs.push_back(ref);
  }
  return refs;
}

std::vector<BaselineReference> generate_baseline_references(
    const ReferencePath& path, double t, double progression_speed, int horizon, double dt,
    const dynamics::State& current, double d_ref) {
  const auto stage_refs = generate_references(path, t, progression_speed, horizon, dt, current);
  std::vector<BaselineReference> refs;
  refs.reserve(stage_refs.size());
  for (const auto& sr : stage_refs) {
    refs.push_back(baseline_reference(sr, d_ref));
  }
  return refs;
}

}  // namespace wti::control
