#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <string>
#include <vector>

namespace wti::geometry {

// Parametric description of the turbine blade assembly. Distances in meters,
// angles in degrees. The tower itself is never meshed; only the three blades
// are inspection targets.
struct TurbineSpec {
  double tower_height = 120.0;
  double blade_length = 50.0;
  double blade_width = 3.0;
  Eigen::Vector3d hub_position{0.0, 0.0, 120.0};
  double assembly_rotation_deg = 0.0;
  int face_subdivisions = 25;
  int blade_count = 3;

  double blade_thickness() const { return blade_width / 3.0; }

  // Throws ConfigError on non-positive dimensions or subdivisions < 1.
  void validate() const;

  static TurbineSpec vestas_v100();
};

// Face ids 0..3 are the four long faces of a blade cuboid; end caps carry the
// reserved id below and are excluded from planning and coverage.
inline constexpr int kEndCapFaceId = 4;

struct Triangle {
  std::array<Eigen::Vector3d, 3> vertices;
  Eigen::Vector3d normal;    // unit, outward
  Eigen::Vector3d centroid;  // vertex mean
  int blade_id = 0;
  int face_id = 0;

  // Normal is derived from the winding (right-hand rule), so identical vertex
  // coordinates always produce identical normals.
  static Triangle from_vertices(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                const Eigen::Vector3d& c, int blade_id, int face_id);
};

struct TriMesh {
  std::vector<Triangle> triangles;

  bool empty() const { return triangles.empty(); }
  std::size_t size() const { return triangles.size(); }

  static bool is_long_face(const Triangle& t) { return t.face_id != kEndCapFaceId; }
  std::size_t long_face_count() const;
};

// Builds the blade assembly: blade_count cuboids of blade_length x blade_width
// x blade_width/3, fanned 120 deg apart about the horizontal rotor axis (+x
// through the hub), blade 0 pointing straight up before assembly rotation.
// Each long face is split into 2*face_subdivisions right triangles.
TriMesh generate_turbine_mesh(const TurbineSpec& spec);

// Sum of long-face triangle areas for one blade.
double long_face_area(const TriMesh& mesh, int blade_id);

// ASCII export (OBJ subset: g/v/f records). Re-import reproduces coordinates
// bit-exactly.
void export_mesh(const TriMesh& mesh, const std::string& path);
TriMesh import_mesh(const std::string& path);

}  // namespace wti::geometry
