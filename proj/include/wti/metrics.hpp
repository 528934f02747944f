#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

#include "wti/dynamics.hpp"
#include "wti/geometry.hpp"

namespace wti::metrics {

// Pinhole camera rigidly mounted along the body +x axis.
struct CameraModel {
  double hfov_deg = 90.0;
  double vfov_deg = 65.0;
  double max_range = 21.0;  // m, defaults to 3 * d_ref

  void validate() const;
};

struct LogRecord {
  double t = 0.0;
  dynamics::State state;
  dynamics::ControlInput control;
  Eigen::Vector3d point{0, 0, 0};      // active inspection point
  Eigen::Vector3d normal_xy{1, 0, 0};  // its planar unit normal
  double h = 0.0;
  double d = 0.0;
  double r = 0.0;
  double o = 0.0;
  double objective = 0.0;
  int qp_iterations = 0;
  double solve_time = 0.0;
  int phase = 1;
  bool degraded = false;
  bool in_transit = false;  // reference between clusters, not on a surface sweep
};

struct TrajectoryLog {
  std::vector<LogRecord> records;
  double dt = 0.01;
  bool unstable = false;  // degraded-step rate exceeded 10%
  bool aborted = false;   // plant numeric fault
  std::string note;
};

// A triangle is viewed when all three vertices are in front of the camera,
// inside both FOV half-angles and within range, and the face points at the
// camera.
bool triangle_visible(const geometry::Triangle& tri, const Eigen::Vector3d& camera_position,
                      const Eigen::Quaterniond& attitude, const CameraModel& camera);

// Percentage of records with |d - d_ref| strictly inside the margin.
double safety_metric(const TrajectoryLog& log, double d_ref, double margin);

// Long-face triangles viewed at least once, as a percentage. The two-phase
// variant checks each record against its phase's mesh; triangle ids align
// across the assembly rotation.
double coverage_percent(const TrajectoryLog& log, const geometry::TriMesh& mesh,
                        const CameraModel& camera);
double coverage_percent_two_phase(const TrajectoryLog& log, const geometry::TriMesh& phase1,
                                  const geometry::TriMesh& phase2, const CameraModel& camera);

struct CenteringResult {
  double mean = 0.0;
  double min = 0.0;
  int degenerate_records = 0;  // excluded from the statistics
};
CenteringResult centering_metric(const TrajectoryLog& log);

struct DistanceStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};
DistanceStats distance_stats(const TrajectoryLog& log);

struct MetricsReport {
  double coverage_pct = 0.0;
  double sm_pct = 0.0;
  double cm_mean = 0.0;
  double cm_min = 0.0;
  DistanceStats distance;
  int degenerate_records = 0;
  // Same statistics restricted to surface sweeps (inter-cluster transit legs
  // excluded); the headline numbers above cover the entire trajectory.
  double sm_surface_pct = 0.0;
  double cm_surface_mean = 0.0;
  DistanceStats distance_surface;
};

// Records whose reference lies on a cluster sweep (transit legs dropped).
TrajectoryLog surface_records(const TrajectoryLog& log);

}  // namespace wti::metrics
