#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "wti/geometry.hpp"

namespace wti::planner {

// One blade surface: a group of coplanar long-face triangles sharing a blade
// and a normal direction. Root/tip are the centroids of the z-extreme members.
struct SurfaceCluster {
  int cluster_id = 0;
  int blade_id = 0;
  std::vector<int> triangle_ids;  // ordered by centroid z
  Eigen::Vector3d mean_normal{1, 0, 0};
  Eigen::Vector3d root_node{0, 0, 0};
  Eigen::Vector3d tip_node{0, 0, 0};
};

enum class NodeEnd { Root, Tip };

struct TourNode {
  int node_id = 0;
  Eigen::Vector3d position{0, 0, 0};
  int cluster_id = 0;
  NodeEnd end_label = NodeEnd::Root;
};

struct Tour {
  std::vector<TourNode> nodes;  // cluster pairs adjacent, entry then exit
  double total_length = 0.0;
};

struct InspectionPoint {
  Eigen::Vector3d position{0, 0, 0};
  Eigen::Vector3d normal{1, 0, 0};  // outward surface normal, unit
  int cluster_id = 0;
  int phase = 1;
};

// Sum of consecutive node distances; shared by the solver and the test oracle
// so both accumulate in the same order.
double tour_length(const std::vector<TourNode>& nodes);

// Groups long-face triangles by blade id and normal direction quantized to
// 1 degree bins; end caps are dropped. Throws PlanningError on a mesh without
// long faces.
std::vector<SurfaceCluster> cluster_surfaces(const geometry::TriMesh& mesh);

// Two nodes per cluster, ids 2*cluster_id (root) and 2*cluster_id+1 (tip).
std::vector<TourNode> make_tour_nodes(const std::vector<SurfaceCluster>& clusters);

// Exact minimum-length open tour that starts at the node nearest
// start_position and visits each cluster's two nodes consecutively. Dynamic
// program over (visited set, last cluster, last orientation); ties broken
// toward lower node ids.
Tour solve_tour(const std::vector<TourNode>& nodes, const Eigen::Vector3d& start_position);

// Evenly spaced points (both ends included) on each cluster's entry-exit
// segment, carrying the cluster's mean normal. Inter-cluster legs emit
// nothing.
std::vector<InspectionPoint> interpolate_path(const Tour& tour,
                                              const std::vector<SurfaceCluster>& clusters,
                                              double spacing);

struct PlanResult {
  std::vector<InspectionPoint> points;  // phase 1 then phase 2
  double phase1_tour_length = 0.0;
  double phase2_tour_length = 0.0;
  int phase1_clusters = 0;
  int phase2_clusters = 0;

  std::vector<InspectionPoint> phase_points(int phase) const;
};

// Full two-phase plan: phase 1 on the as-specified assembly, phase 2 on the
// assembly rotated +120 deg, restricted to the faces that pointed toward the
// ground in phase 1.
PlanResult plan_inspection(const geometry::TurbineSpec& spec, double spacing,
                           const Eigen::Vector3d& start_position);

// CSV export: phase,cluster_id,x,y,z,nx,ny,nz - one record per point.
void export_plan(const std::vector<InspectionPoint>& points, const std::string& path);

}  // namespace wti::planner
