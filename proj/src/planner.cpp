#include "wti/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "wti/errors.hpp"

namespace wti::planner {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

// 1-degree quantization of a unit direction, stable for the axis-aligned and
// 30/150-degree normals this mesh produces.
std::pair<int, int> quantize_direction(const Eigen::Vector3d& n) {
  const double polar = std::acos(std::clamp(n.z(), -1.0, 1.0)) * kRadToDeg;
  const double azimuth = std::atan2(n.y(), n.x()) * kRadToDeg;
  return {static_cast<int>(std::lround(polar)), static_cast<int>(std::lround(azimuth))};
}

}  // namespace

double tour_length(const std::vector<TourNode>& nodes) {
  double length = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    length += (nodes[i].position - nodes[i - 1].position).norm();
  }
  return length;
}

std::vector<SurfaceCluster> cluster_surfaces(const geometry::TriMesh& mesh) {
  using Key = std::tuple<int, int, int>;  // blade, polar bin, azimuth bin
  std::map<Key, std::vector<int>> groups;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    if (!geometry::TriMesh::is_long_face(t)) continue;
    const auto [polar, azimuth] = quantize_direction(t.normal);
    groups[{t.blade_id, polar, azimuth}].push_back(static_cast<int>(i));
  }
  if (groups.empty()) {
    throw PlanningError("cluster_surfaces: mesh has no long-face triangles");
  }

  std::vector<SurfaceCluster> clusters;
  clusters.reserve(groups.size());
  int next_id = 0;
  for (auto& [key, ids] : groups) {
    SurfaceCluster c;
    c.cluster_id = next_id++;
    c.blade_id = std::get<0>(key);
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
      return mesh.triangles[a].centroid.z() < mesh.triangles[b].centroid.z();
    });
    c.triangle_ids = ids;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (int id : ids) sum += mesh.triangles[id].normal;
    c.mean_normal = sum.normalized();
    c.root_node = mesh.triangles[ids.front()].centroid;
    c.tip_node = mesh.triangles[ids.back()].centroid;
    clusters.push_back(std::move(c));
  }
  return clusters;
}

std::vector<TourNode> make_tour_nodes(const std::vector<SurfaceCluster>& clusters) {
  std::vector<TourNode> nodes;
  nodes.reserve(clusters.size() * 2);
  for (const auto& c : clusters) {
    nodes.push_back({2 * c.cluster_id, c.root_node, c.cluster_id, NodeEnd::Root});
    nodes.push_back({2 * c.cluster_id + 1, c.tip_node, c.cluster_id, NodeEnd::Tip});
  }
  return nodes;
}

Tour solve_tour(const std::vector<TourNode>& nodes, const Eigen::Vector3d& start_position) {
  if (nodes.empty() || nodes.size() % 2 != 0) {
    throw PlanningError("solve_tour: node count must be even and non-zero");
  }

  // Collect cluster pairs in deterministic (cluster id) order.
  std::map<int, std::array<const TourNode*, 2>> pairs;
  for (const auto& n : nodes) {
    auto& slot = pairs[n.cluster_id];
    const int idx = (n.end_label == NodeEnd::Root) ? 0 : 1;
    if (slot[idx] != nullptr) {
      throw PlanningError("solve_tour: duplicate node label in cluster " +
                          std::to_string(n.cluster_id));
    }
    slot[idx] = &n;
  }
  std::vector<std::array<const TourNode*, 2>> cluster_nodes;
  for (const auto& [id, pair] : pairs) {
    if (pair[0] == nullptr || pair[1] == nullptr) {
      throw PlanningError("solve_tour: cluster " + std::to_string(id) + " is missing a node");
    }
    cluster_nodes.push_back(pair);
  }
  const int num_clusters = static_cast<int>(cluster_nodes.size());
  if (num_clusters > 20) {
    throw PlanningError("solve_tour: instance too large for exact search");
  }

  // Anchor: globally nearest node to the start position, ties toward the
  // lower node id.
  int anchor_cluster = 0;
  int anchor_orient = 0;
  {
    double best = std::numeric_limits<double>::infinity();
    int best_node_id = std::numeric_limits<int>::max();
    for (int c = 0; c < num_clusters; ++c) {
      for (int o = 0; o < 2; ++o) {
        const double d = (cluster_nodes[c][o]->position - start_position).norm();
        const int id = cluster_nodes[c][o]->node_id;
        if (d < best || (d == best && id < best_node_id)) {
          best = d;
          best_node_id = id;
          anchor_cluster = c;
          anchor_orient = o;
        }
      }
    }
  }

  // DP over (visited mask, last cluster, orientation); orientation o means the
  // cluster was entered at node o and exited at node 1-o.
  const int num_masks = 1 << num_clusters;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(static_cast<std::size_t>(num_masks) * num_clusters * 2, kInf);
  std::vector<int> parent(cost.size(), -1);
  auto index = [num_clusters](int mask, int cluster, int orient) {
    return (static_cast<std::size_t>(mask) * num_clusters + cluster) * 2 + orient;
  };
  auto pair_dist = [&](int c) {
    return (cluster_nodes[c][0]->position - cluster_nodes[c][1]->position).norm();
  };

  const int start_mask = 1 << anchor_cluster;
  cost[index(start_mask, anchor_cluster, anchor_orient)] = pair_dist(anchor_cluster);

  for (int mask = start_mask; mask < num_masks; ++mask) {
    if (!(mask & start_mask)) continue;
    for (int last = 0; last < num_clusters; ++last) {
      if (!(mask & (1 << last))) continue;
      for (int orient = 0; orient < 2; ++orient) {
        const double base = cost[index(mask, last, orient)];
        if (!std::isfinite(base)) continue;
        const Eigen::Vector3d exit = cluster_nodes[last][1 - orient]->position;
        for (int next = 0; next < num_clusters; ++next) {
          if (mask & (1 << next)) continue;
          const int next_mask = mask | (1 << next);
          for (int o = 0; o < 2; ++o) {
            const double candidate =
                base + (cluster_nodes[next][o]->position - exit).norm() + pair_dist(next);
            auto& slot = cost[index(next_mask, next, o)];
            if (candidate < slot) {
              slot = candidate;
              parent[index(next_mask, next, o)] = index(mask, last, orient);
            }
          }
        }
      }
    }
  }

  // Best terminal state over (last, orient), deterministic scan order.
  const int full_mask = num_masks - 1;
  int best_last = -1, best_orient = 0;
  double best_cost = kInf;
  for (int last = 0; last < num_clusters; ++last) {
    for (int orient = 0; orient < 2; ++orient) {
      const double c = cost[index(full_mask, last, orient)];
      if (c < best_cost) {
        best_cost = c;
        best_last = last;
        best_orient = orient;
      }
    }
  }
  if (best_last < 0) throw PlanningError("solve_tour: no feasible tour");

  // Reconstruct cluster visit order.
  std::vector<std::pair<int, int>> order;  // (cluster, orientation)
  int mask = full_mask, last = best_last, orient = best_orient;
  while (true) {
    order.emplace_back(last, orient);
    const int p = parent[index(mask, last, orient)];
    if (p < 0) break;
    const int prev_mask = p / (num_clusters * 2);
    const int rem = p % (num_clusters * 2);
    mask = prev_mask;
    last = rem / 2;
    orient = rem % 2;
  }
  std::reverse(order.begin(), order.end());

  Tour tour;
  tour.nodes.reserve(order.size() * 2);
  for (const auto& [c, o] : order) {
    tour.nodes.push_back(*cluster_nodes[c][o]);
    tour.nodes.push_back(*cluster_nodes[c][1 - o]);
  }
  tour.total_length = tour_length(tour.nodes);
  return tour;
}

std::vector<InspectionPoint> interpolate_path(const Tour& tour,
                                              const std::vector<SurfaceCluster>& clusters,
                                              double spacing) {
  if (!(spacing > 0.0)) throw PlanningError("interpolate_path: spacing must be > 0");

  std::map<int, const SurfaceCluster*> by_id;
  for (const auto& c : clusters) by_id[c.cluster_id] = &c;

  std::vector<InspectionPoint> points;
  for (std::size_t i = 0; i + 1 < tour.nodes.size(); i += 2) {
    const auto& entry = tour.nodes[i];
    const auto& exit = tour.nodes[i + 1];
    if (entry.cluster_id != exit.cluster_id) {
      throw PlanningError("interpolate_path: tour nodes are not cluster-paired");
    }
    const auto it = by_id.find(entry.cluster_id);
    if (it == by_id.end()) {
      throw PlanningError("interpolate_path: unknown cluster " +
                          std::to_string(entry.cluster_id));
    }
    const Eigen::Vector3d delta = exit.position - entry.position;
    const double length = delta.norm();
    const int intervals = std::max(1, static_cast<int>(std::ceil(length / spacing - 1e-12)));
    for (int j = 0; j <= intervals; ++j) {
      InspectionPoint p;
      p.position = entry.position + delta * (static_cast<double>(j) / intervals);
      p.normal = it->second->mean_normal;
      p.cluster_id = entry.cluster_id;
      points.push_back(p);
    }
  }
  return points;
}

std::vector<InspectionPoint> PlanResult::phase_points(int phase) const {
  std::vector<InspectionPoint> out;
  for (const auto& p : points) {
    if (p.phase == phase) out.push_back(p);
  }
  return out;
}

PlanResult plan_inspection(const geometry::TurbineSpec& spec, double spacing,
                           const Eigen::Vector3d& start_position) {
  PlanResult result;

  const auto mesh1 = geometry::generate_turbine_mesh(spec);
  const auto clusters1 = cluster_surfaces(mesh1);
  const auto tour1 = solve_tour(make_tour_nodes(clusters1), start_position);
  auto points1 = interpolate_path(tour1, clusters1, spacing);
  for (auto& p : points1) p.phase = 1;
  result.phase1_tour_length = tour1.total_length;
  result.phase1_clusters = static_cast<int>(clusters1.size());
  result.points = std::move(points1);

  // Faces pointing toward the ground cannot be imaged in phase 1; the
  // assembly is rotated 120 deg and only those faces are re-planned. Triangle
  // ids are stable across the rotation, so clusters are matched by id set
  // (the within-cluster z-order may flip).
  auto sorted_ids = [](std::vector<int> ids) {
    std::sort(ids.begin(), ids.end());
    return ids;
  };
  std::set<std::vector<int>> downward_triangle_sets;
  for (const auto& c : clusters1) {
    if (c.mean_normal.z() < -0.5) downward_triangle_sets.insert(sorted_ids(c.triangle_ids));
  }
  if (!downward_triangle_sets.empty()) {
    geometry::TurbineSpec rotated = spec;
    rotated.assembly_rotation_deg += 120.0;
    const auto mesh2 = geometry::generate_turbine_mesh(rotated);
    const auto clusters2 = cluster_surfaces(mesh2);
    std::vector<SurfaceCluster> selected;
    for (const auto& c : clusters2) {
      if (downward_triangle_sets.count(sorted_ids(c.triangle_ids))) selected.push_back(c);
    }
    if (selected.size() != downward_triangle_sets.size()) {
      throw PlanningError("plan_inspection: phase-2 cluster mapping failed");
    }
    const Eigen::Vector3d phase2_start =
        tour1.nodes.empty() ? start_position : tour1.nodes.back().position;
    const auto tour2 = solve_tour(make_tour_nodes(selected), phase2_start);
    auto points2 = interpolate_path(tour2, selected, spacing);
    for (auto& p : points2) p.phase = 2;
    result.phase2_tour_length = tour2.total_length;
    result.phase2_clusters = static_cast<int>(selected.size());
    result.points.insert(result.points.end(), points2.begin(), points2.end());
  }
  return result;
}

void export_plan(const std::vector<InspectionPoint>& points, const std::string& path) {
  if (path.empty()) throw IoError("plan export: empty path");
  std::ofstream out(path);
  if (!out) throw IoError("plan export: cannot open '" + path + "'");
  out << "phase,cluster_id,x,y,z,nx,ny,nz\n";
  char buf[192];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.phase,
                  p.cluster_id, p.position.x(), p.position.y(), p.position.z(), p.normal.x(),
                  p.normal.y(), p.normal.z());
    out << buf;
  }
  if (!out.good()) throw IoError("plan export: write failed for '" + path + "'");
}

}  // namespace wti::planner
