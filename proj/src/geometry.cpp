#include "wti/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wti/errors.hpp"

namespace wti::geometry {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

void append_quad(std::vector<Triangle>& out, const Eigen::Vector3d& a,
                 const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                 const Eigen::Vector3d& d, int blade_id, int face_id) {
  out.push_back(Triangle::from_vertices(a, b, c, blade_id, face_id));
  out.push_back(Triangle::from_vertices(a, c, d, blade_id, face_id));
}

}  // namespace

void TurbineSpec::validate() const {
  if (!(tower_height > 0.0) || !(blade_length > 0.0) || !(blade_width > 0.0)) {
    throw ConfigError("turbine spec: all dimensions must be strictly positive");
  }
  if (face_subdivisions < 1) {
    throw ConfigError("turbine spec: face_subdivisions must be >= 1");
  }
  if (blade_count < 1) {
    throw ConfigError("turbine spec: blade_count must be >= 1");
  }
}

TurbineSpec TurbineSpec::vestas_v100() {
  TurbineSpec spec;
  spec.tower_height = 120.0;
  spec.blade_length = 50.0;
  spec.blade_width = 3.0;
  spec.hub_position = Eigen::Vector3d(0.0, 0.0, 120.0);
  return spec;
}

Triangle Triangle::from_vertices(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                 const Eigen::Vector3d& c, int blade_id, int face_id) {
  Triangle t;
  t.vertices = {a, b, c};
  t.normal = (b - a).cross(c - a).normalized();
  t.centroid = (a + b + c) / 3.0;
  t.blade_id = blade_id;
  t.face_id = face_id;
  return t;
}

std::size_t TriMesh::long_face_count() const {
  std::size_t n = 0;
  for (const auto& t : triangles) {
    if (is_long_face(t)) ++n;
  }
  return n;
}

TriMesh generate_turbine_mesh(const TurbineSpec& spec) {
  spec.validate();

  const double half_w = spec.blade_width / 2.0;
  const double half_t = spec.blade_thickness() / 2.0;
  const double length = spec.blade_length;
  const int subdivisions = spec.face_subdivisions;

  TriMesh mesh;
  mesh.triangles.reserve(static_cast<std::size_t>(spec.blade_count) *
                         (4 * 2 * subdivisions + 4));

  for (int blade = 0; blade < spec.blade_count; ++blade) {
    const double angle = (spec.assembly_rotation_deg + 120.0 * blade) * kDegToRad;
    const Eigen::AngleAxisd rot(angle, Eigen::Vector3d::UnitX());
    auto place = [&](double x, double y, double z) -> Eigen::Vector3d {
      return spec.hub_position + rot * Eigen::Vector3d(x, y, z);
    };

    for (int k = 0; k < subdivisions; ++k) {
      const double z0 = length * k / subdivisions;
      const double z1 = length * (k + 1) / subdivisions;
      // +x face (outward normal along local +x)
      append_quad(mesh.triangles, place(half_t, -half_w, z0), place(half_t, half_w, z0),
                  place(half_t, half_w, z1), place(half_t, -half_w, z1), blade, 0);
      // -x face
      append_quad(mesh.triangles, place(-half_t, half_w, z0), place(-half_t, -half_w, z0),
                  place(-half_t, -half_w, z1), place(-half_t, half_w, z1), blade, 1);
      // +y face
      append_quad(mesh.triangles, place(half_t, half_w, z0), place(-half_t, half_w, z0),
                  place(-half_t, half_w, z1), place(half_t, half_w, z1), blade, 2);
      // -y face
      append_quad(mesh.triangles, place(-half_t, -half_w, z0), place(half_t, -half_w, z0),
                  place(half_t, -half_w, z1), place(-half_t, -half_w, z1), blade, 3);
    }
    // Root cap (local -z) and tip cap (local +z).
    append_quad(mesh.triangles, place(-half_t, -half_w, 0.0), place(-half_t, half_w, 0.0),
                place(half_t, half_w, 0.0), place(half_t, -half_w, 0.0), blade,
                kEndCapFaceId);
    append_quad(mesh.triangles, place(-half_t, -half_w, length), place(half_t, -half_w, length),
                place(half_t, half_w, length), place(-half_t, half_w, length), blade,
                kEndCapFaceId);
  }
  return mesh;
}

double long_face_area(const TriMesh& mesh, int blade_id) {
  double area = 0.0;
  for (const auto& t : mesh.triangles) {
    if (t.blade_id != blade_id || !TriMesh::is_long_face(t)) continue;
    area += 0.5 * (t.vertices[1] - t.vertices[0]).cross(t.vertices[2] - t.vertices[0]).norm();
  }
  return area;
}

void export_mesh(const TriMesh& mesh, const std::string& path) {
  if (path.empty()) throw IoError("mesh export: empty path");
  std::ofstream out(path);
  if (!out) throw IoError("mesh export: cannot open '" + path + "'");

  char buf[96];
  int last_blade = -1;
  int last_face = -1;
  std::size_t vertex_count = 0;
  for (const auto& t : mesh.triangles) {
    if (t.blade_id != last_blade || t.face_id != last_face) {
      out << "g blade" << t.blade_id << "_face" << t.face_id << "\n";
      last_blade = t.blade_id;
      last_face = t.face_id;
    }
    for (const auto& v : t.vertices) {
      std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
      out << buf;
    }
    out << "f " << vertex_count + 1 << " " << vertex_count + 2 << " " << vertex_count + 3
        << "\n";
    vertex_count += 3;
  }
  if (!out.good()) throw IoError("mesh export: write failed for '" + path + "'");
}

TriMesh import_mesh(const std::string& path) {
  if (path.empty()) throw IoError("mesh import: empty path");
  std::ifstream in(path);
  if (!in) throw IoError("mesh import: cannot open '" + path + "'");

  std::vector<Eigen::Vector3d> vertices;
  TriMesh mesh;
  int blade_id = 0;
  int face_id = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "g") {
      std::string name;
      ls >> name;
      if (std::sscanf(name.c_str(), "blade%d_face%d", &blade_id, &face_id) != 2) {
        throw IoError("mesh import: bad group record in '" + path + "': " + line);
      }
    } else if (tag == "v") {
      Eigen::Vector3d v;
      if (!(ls >> v.x() >> v.y() >> v.z())) {
        throw IoError("mesh import: bad vertex record in '" + path + "': " + line);
      }
      vertices.push_back(v);
    } else if (tag == "f") {
      std::size_t i = 0, j = 0, k = 0;
      if (!(ls >> i >> j >> k) || i == 0 || j == 0 || k == 0 || i > vertices.size() ||
          j > vertices.size() || k > vertices.size()) {
        throw IoError("mesh import: bad face record in '" + path + "': " + line);
      }
      mesh.triangles.push_back(Triangle::from_vertices(vertices[i - 1], vertices[j - 1],
                                                       vertices[k - 1], blade_id, face_id));
    }
  }
  if (mesh.empty()) throw IoError("mesh import: no faces found in '" + path + "'");
  return mesh;
}

}  // namespace wti::geometry
