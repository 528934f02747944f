#include <doctest.h>

#include <Eigen/Geometry>
#include <cstdio>
#include <filesystem>

#include "wti/errors.hpp"
#include "wti/geometry.hpp"

using namespace wti;
using geometry::TriMesh;
using geometry::TurbineSpec;

namespace {

TurbineSpec v100_with(int subdivisions) {
  TurbineSpec spec = TurbineSpec::vestas_v100();
  spec.face_subdivisions = subdivisions;
  return spec;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("triangle counts follow the construction rule") {
  // 3 blades x (4 faces x 2S + 2 caps x 2)
  CHECK(geometry::generate_turbine_mesh(v100_with(1)).size() == 36);
  CHECK(geometry::generate_turbine_mesh(v100_with(25)).size() == 612);

  TurbineSpec single = v100_with(1);
  single.blade_count = 1;
  CHECK(geometry::generate_turbine_mesh(single).size() == 12);
}

TEST_CASE("v100 blades are 50 x 3 x 1 cuboids in inverted-Y") {
  const auto mesh = geometry::generate_turbine_mesh(v100_with(4));

  // Blade 0 is vertical: local axes align with the world.
  Eigen::AlignedBox3d box0;
  for (const auto& t : mesh.triangles) {
    if (t.blade_id != 0) continue;
    for (const auto& v : t.vertices) box0.extend(v);
  }
  CHECK(box0.min().x() == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(box0.max().x() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(box0.min().y() == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(box0.max().y() == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(box0.min().z() == doctest::Approx(120.0).epsilon(1e-12));
  CHECK(box0.max().z() == doctest::Approx(170.0).epsilon(1e-12));

  // Blades 1 and 2 point 120 deg away from vertical, i.e. downward. The two
  // tip-cap triangle centroids average to a point exactly on the blade axis.
  for (int blade : {1, 2}) {
    Eigen::Vector3d tip_sum = Eigen::Vector3d::Zero();
    int tip_count = 0;
    for (const auto& t : mesh.triangles) {
      if (t.blade_id != blade || t.face_id != geometry::kEndCapFaceId) continue;
      if ((t.centroid - Eigen::Vector3d(0, 0, 120.0)).norm() > 25.0) {
        tip_sum += t.centroid;
        ++tip_count;
      }
    }
    REQUIRE(tip_count == 2);
    const Eigen::Vector3d axis = (tip_sum / 2.0 - Eigen::Vector3d(0, 0, 120.0)).normalized();
    CHECK(axis.z() == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(std::abs(axis.x()) < 1e-12);
  }
}

TEST_CASE("normals are unit, orthogonal to the plane, outward-wound") {
  const auto mesh = geometry::generate_turbine_mesh(v100_with(3));
  const Eigen::Vector3d hub(0, 0, 120);
  for (const auto& t : mesh.triangles) {
    CHECK(std::abs(t.normal.norm() - 1.0) < 1e-9);
    const Eigen::Vector3d e1 = t.vertices[1] - t.vertices[0];
    const Eigen::Vector3d e2 = t.vertices[2] - t.vertices[0];
    CHECK(std::abs(t.normal.dot(e1.normalized())) < 1e-9);
    CHECK(std::abs(t.normal.dot(e2.normalized())) < 1e-9);
    CHECK((t.centroid - (t.vertices[0] + t.vertices[1] + t.vertices[2]) / 3.0).norm() < 1e-12);
    // Winding consistent with the stored normal.
    CHECK(t.normal.dot(e1.cross(e2)) > 0.0);
  }
}

TEST_CASE("long-face area matches the blade dimensions") {
  const auto mesh = geometry::generate_turbine_mesh(v100_with(25));
  const double expected = 2.0 * (50.0 * 3.0) + 2.0 * (50.0 * 1.0);
  for (int blade = 0; blade < 3; ++blade) {
    CHECK(geometry::long_face_area(mesh, blade) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("generation is deterministic") {
  const auto a = geometry::generate_turbine_mesh(v100_with(7));
  const auto b = geometry::generate_turbine_mesh(v100_with(7));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(a.triangles[i].vertices[k] == b.triangles[i].vertices[k]);
    }
  }
}

TEST_CASE("assembly rotation is a rigid rotation about the rotor axis") {
  TurbineSpec spec = v100_with(2);
  const auto base = geometry::generate_turbine_mesh(spec);
  spec.assembly_rotation_deg = 120.0;
  const auto rotated = geometry::generate_turbine_mesh(spec);

  const Eigen::AngleAxisd rot(120.0 * M_PI / 180.0, Eigen::Vector3d::UnitX());
  const Eigen::Vector3d hub = spec.hub_position;
  REQUIRE(base.size() == rotated.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d expected = hub + rot * (base.triangles[i].vertices[k] - hub);
      CHECK((expected - rotated.triangles[i].vertices[k]).norm() < 1e-9);
    }
  }
}

TEST_CASE("rotating by 360 degrees reproduces the mesh") {
  TurbineSpec spec = v100_with(2);
  const auto base = geometry::generate_turbine_mesh(spec);
  spec.assembly_rotation_deg = 360.0;
  const auto turned = geometry::generate_turbine_mesh(spec);
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK((base.triangles[i].vertices[k] - turned.triangles[i].vertices[k]).norm() < 1e-9);
    }
  }
}

TEST_CASE("invalid specs are rejected") {
  TurbineSpec spec = TurbineSpec::vestas_v100();
  spec.blade_length = 0.0;
  CHECK_THROWS_AS(geometry::generate_turbine_mesh(spec), ConfigError);
  spec = TurbineSpec::vestas_v100();
  spec.blade_width = -1.0;
  CHECK_THROWS_AS(geometry::generate_turbine_mesh(spec), ConfigError);
  spec = TurbineSpec::vestas_v100();
  spec.face_subdivisions = 0;
  CHECK_THROWS_AS(geometry::generate_turbine_mesh(spec), ConfigError);
}

TEST_CASE("export/import round trip is bit exact") {
  const auto mesh = geometry::generate_turbine_mesh(v100_with(1));
  const auto path = (std::filesystem::temp_directory_path() / "wti_mesh_test.obj").string();
  geometry::export_mesh(mesh, path);
  const auto back = geometry::import_mesh(path);
  REQUIRE(back.size() == mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    CHECK(back.triangles[i].blade_id == mesh.triangles[i].blade_id);
    CHECK(back.triangles[i].face_id == mesh.triangles[i].face_id);
    for (int k = 0; k < 3; ++k) {
      CHECK(back.triangles[i].vertices[k] == mesh.triangles[i].vertices[k]);
    }
    CHECK(back.triangles[i].normal == mesh.triangles[i].normal);
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(geometry::export_mesh(mesh, ""), IoError);
  CHECK_THROWS_AS(geometry::import_mesh("/nonexistent/missing.obj"), IoError);
}

}  // TEST_SUITE
