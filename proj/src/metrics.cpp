#include "wti/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wti/errors.hpp"

namespace wti::metrics {

void CameraModel::validate() const {
  if (!(hfov_deg > 0.0) || hfov_deg >= 180.0 || !(vfov_deg > 0.0) || vfov_deg >= 180.0) {
    throw ConfigError("camera: FOV angles must lie in (0, 180) degrees");
  }
  if (!(max_range > 0.0)) throw ConfigError("camera: max_range must be > 0");
}

bool triangle_visible(const geometry::Triangle& tri, const Eigen::Vector3d& camera_position,
                      const Eigen::Quaterniond& attitude, const CameraModel& camera) {
  const double tan_h = std::tan(0.5 * camera.hfov_deg * M_PI / 180.0);
  const double tan_v = std::tan(0.5 * camera.vfov_deg * M_PI / 180.0);
  for (const auto& vertex : tri.vertices) {
    const Eigen::Vector3d rel = vertex - camera_position;
    if (rel.norm() > camera.max_range) return false;
    // Body frame: x forward, y left, z up.
    const Eigen::Vector3d cam = dynamics::rotate_inverse(attitude, rel);
    if (cam.x() <= 0.0) return false;
    if (std::abs(cam.y()) > tan_h * cam.x()) return false;
    if (std::abs(cam.z()) > tan_v * cam.x()) return false;
  }
  return tri.normal.dot(tri.centroid - camera_position) < 0.0;
}

double safety_metric(const TrajectoryLog& log, double d_ref, double margin) {
  if (!(margin > 0.0)) throw ConfigError("safety_metric: margin must be > 0");
  if (log.records.empty()) throw ConfigError("safety_metric: empty log");
  std::size_t inside = 0;
  for (const auto& rec : log.records) {
    if (std::abs(rec.d - d_ref) < margin) ++inside;
  }
  return 100.0 * static_cast<double>(inside) / static_cast<double>(log.records.size());
}

namespace {

double coverage_impl(const TrajectoryLog& log,
                     const std::vector<const geometry::TriMesh*>& mesh_by_phase,
                     const CameraModel& camera) {
  camera.validate();
  const geometry::TriMesh* base = nullptr;
  for (const auto* m : mesh_by_phase) {
    if (m != nullptr) base = m;
  }
  if (base == nullptr || base->empty()) throw ConfigError("coverage: empty mesh");

  const std::size_t total = base->triangles.size();
  std::vector<char> viewed(total, 0);
  std::size_t long_faces = 0;
  for (const auto& t : base->triangles) {
    if (geometry::TriMesh::is_long_face(t)) ++long_faces;
  }
  if (long_faces == 0) throw ConfigError("coverage: mesh has no long faces");

  for (const auto& rec : log.records) {
    const geometry::TriMesh* mesh =
        (rec.phase >= 1 && rec.phase <= static_cast<int>(mesh_by_phase.size()))
            ? mesh_by_phase[rec.phase - 1]
            : nullptr;
    if (mesh == nullptr) continue;
    for (std::size_t i = 0; i < total; ++i) {
      if (viewed[i]) continue;
      const auto& tri = mesh->triangles[i];
      if (!geometry::TriMesh::is_long_face(tri)) continue;
      if (triangle_visible(tri, rec.state.position, rec.state.attitude, camera)) {
        viewed[i] = 1;
      }
    }
  }
  std::size_t count = 0;
  for (char v : viewed) count += v;
  return 100.0 * static_cast<double>(count) / static_cast<double>(long_faces);
}

}  // namespace

double coverage_percent(const TrajectoryLog& log, const geometry::TriMesh& mesh,
                        const CameraModel& camera) {
  return coverage_impl(log, {&mesh, &mesh}, camera);
}

double coverage_percent_two_phase(const TrajectoryLog& log, const geometry::TriMesh& phase1,
                                  const geometry::TriMesh& phase2, const CameraModel& camera) {
  if (phase1.size() != phase2.size()) {
    throw ConfigError("coverage: phase meshes must share topology");
  }
  return coverage_impl(log, {&phase1, &phase2}, camera);
}

CenteringResult centering_metric(const TrajectoryLog& log) {
  if (log.records.empty()) throw ConfigError("centering_metric: empty log");
  CenteringResult result;
  result.min = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& rec : log.records) {
    if (!std::isfinite(rec.h)) {
      ++result.degenerate_records;
      continue;
    }
    sum += rec.h;
    result.min = std::min(result.min, rec.h);
    ++counted;
  }
  if (counted == 0) throw ConfigError("centering_metric: log has no usable heading values");
  result.mean = sum / static_cast<double>(counted);
  return result;
}

TrajectoryLog surface_records(const TrajectoryLog& log) {
  TrajectoryLog filtered;
  filtered.dt = log.dt;
  filtered.unstable = log.unstable;
  filtered.aborted = log.aborted;
  filtered.note = log.note;
  for (const auto& rec : log.records) {
    if (!rec.in_transit) filtered.records.push_back(rec);
  }
  return filtered;
}

DistanceStats distance_stats(const TrajectoryLog& log) {
  if (log.records.empty()) throw ConfigError("distance_stats: empty log");
  DistanceStats stats;
  stats.min = std::numeric_limits<double>::infinity();
  stats.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& rec : log.records) {
    sum += rec.d;
    stats.min = std::min(stats.min, rec.d);
    stats.max = std::max(stats.max, rec.d);
  }
  stats.mean = sum / static_cast<double>(log.records.size());
  return stats;
}

}  // namespace wti::metrics
