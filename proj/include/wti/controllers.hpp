#pragma once

#include <Eigen/Core>
#include <vector>

#include "wti/dynamics.hpp"
#include "wti/planner.hpp"

namespace wti::control {

// References for the four visual costs. The heading reference is 1 (aligned)
// and the orthogonality reference is 0 by construction; the region-of-interest
// reference equals the stand-off distance.
struct VisualReferences {
  double d_ref = 7.0;  // m

  static constexpr double h_ref = 1.0;
  static constexpr double o_ref = 0.0;
  double r_ref() const { return d_ref; }
};

struct ControllerWeights {
  double heading = 80.0;
  double distance = 30.0;
  double roi = 25.0;
  double ortho = 60.0;
  Eigen::Matrix<double, 5, 1> state{
      (Eigen::Matrix<double, 5, 1>() << 0.3, 0.3, 1.0, 80.0, 80.0).finished()};
  Eigen::Vector4d control{1.0, 1.0, 0.25, 0.03};
  double terminal_scale = 1.5;

  // Only the visual-tracking weights are published tunings; the baseline
  // position/yaw weights are a conventional hand tuning whose stand-off
  // fluctuation band sits visibly looser than the visual-tracking
  // controller's.
  Eigen::Vector3d baseline_position{10.0, 10.0, 10.0};
  double baseline_yaw = 80.0;
};

// Per-stage reference for the visual-tracking controller: a surface point,
// its XY-projected unit normal and body-frame progression velocity. There is
// deliberately no drone waypoint here.
struct StageReference {
  Eigen::Vector3d point{0, 0, 0};
  Eigen::Vector3d normal_xy{1, 0, 0};  // unit, z = 0
  Eigen::Vector3d body_velocity_ref{0, 0, 0};
};

struct BaselineReference {
  Eigen::Vector3d position_ref{0, 0, 0};
  double yaw_ref = 0.0;
  Eigen::Vector3d body_velocity_ref{0, 0, 0};
};

// Cosine alignment, in plan view, between the body forward axis and the ray
// to the inspection point; 1 iff the camera axis points at the point. Throws
// DegenerateGeometry when the drone is on the vertical through the point.
double heading_function(const dynamics::State& state, const Eigen::Vector3d& p);

// Planar Euclidean distance to the inspection point.
double distance_function(const dynamics::State& state, const Eigen::Vector3d& p);

// Planar stand-off along the outward surface normal, positive on the outward
// side. n must be an XY-unit vector with zero z.
double roi_function(const dynamics::State& state, const Eigen::Vector3d& p,
                    const Eigen::Vector3d& n);

// Magnitude of the component of the full 3-D drone-to-point offset that is
// perpendicular to the (planar) surface normal. Zero forces normal alignment
// and matched altitude.
double orthogonality_function(const dynamics::State& state, const Eigen::Vector3d& p,
                              const Eigen::Vector3d& n);

inline constexpr int kResidualDim = 13;

// Weighted stage residual [h, d, r, o, x*, u] whose squared norm is the stage
// cost (without the global 1/2).
Eigen::Matrix<double, kResidualDim, 1> vt_nmpc_residuals(const dynamics::State& state,
                                                         const dynamics::ControlInput& control,
                                                         const StageReference& ref,
                                                         const ControllerWeights& weights,
                                                         const VisualReferences& vrefs,
                                                         const dynamics::VehicleParams& params);

// Conventional NMPC residual: position, yaw (as a quaternion z-component
// error, smooth across the +-pi seam), x* and control blocks.
Eigen::Matrix<double, kResidualDim, 1> baseline_nmpc_residuals(
    const dynamics::State& state, const dynamics::ControlInput& control,
    const BaselineReference& ref, const ControllerWeights& weights,
    const dynamics::VehicleParams& params);

// Weighted terminal residual on x* = [u, v, w, qx, qy].
Eigen::Matrix<double, 5, 1> terminal_residuals(const dynamics::State& state,
                                               const Eigen::Vector3d& body_velocity_ref,
                                               const ControllerWeights& weights);

// Offset reference for the baseline controller: d_ref along the planar
// normal, yawed to face the surface.
BaselineReference baseline_reference(const StageReference& stage, double d_ref);

double yaw_from_quaternion(const Eigen::Quaterniond& q);  // Z-Y-X convention

// Arc-length view of an inspection plan. Within a cluster the reference
// slides along the interpolated segment; on a transit leg it slides along
// the straight connecting line while the planar normal rotates continuously
// from the departing to the arriving direction. Transit legs are paced by
// the larger of the leg length and the stand-off orbit arc |dtheta|*radius,
// so the commanded stand-off pose never outruns the progression speed (an
// opposite-face hop would otherwise teleport it through the blade).
class ReferencePath {
 public:
  ReferencePath(std::vector<planner::InspectionPoint> points, double orbit_radius);

  struct Sample {
    Eigen::Vector3d point{0, 0, 0};
    Eigen::Vector3d normal_xy{1, 0, 0};
    Eigen::Vector3d tangent{0, 0, 0};  // d(point)/d(arc length); zero past the end
    int active_index = 0;              // last plan point at or before s
    bool past_end = false;
    bool in_transit = false;  // between clusters rather than on a surface sweep
  };

  Sample sample(double arc_length) const;
  double total_length() const { return total_length_; }  // pacing length
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<planner::InspectionPoint> points_;
  std::vector<Eigen::Vector3d> normals_xy_;  // per point, XY-projected unit
  std::vector<double> cumulative_;           // pacing lengths
  std::vector<double> turn_angle_;           // signed normal rotation per segment
  std::vector<char> transit_;                // per segment
  double total_length_ = 0.0;
};

// Stage references for the whole horizon (N+1 samples so the terminal stage
// has a velocity reference too). Velocity references are the progression
// velocity rotated into the body frame of the current state.
std::vector<StageReference> generate_references(const ReferencePath& path, double t,
                                                double progression_speed, int horizon,
                                                double dt, const dynamics::State& current);

std::vector<BaselineReference> generate_baseline_references(
    const ReferencePath& path, double t, double progression_speed, int horizon, double dt,
    const dynamics::State& current, double d_ref);

}  // namespace wti::control
