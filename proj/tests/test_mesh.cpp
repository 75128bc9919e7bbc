#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>

#include "gapf/error.hpp"
#include "gapf/mesh.hpp"

using namespace gapf;

namespace {

bool same_mesh(const TriangleMesh& a, const TriangleMesh& b) {
  if (a.vertices.size() != b.vertices.size() || a.faces != b.faces) return false;
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    if (a.vertices[i] != b.vertices[i]) return false;
  }
  return true;
}

// Signed volume via the divergence theorem; positive for outward winding.
double signed_volume(const TriangleMesh& m) {
  double v = 0;
  for (const auto& [a, b, c] : m.faces) v += m.vertices[a].dot(m.vertices[b].cross(m.vertices[c])) / 6.0;
  return v;
}

template <typename T>
void put_le(std::string& s, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  s.append(buf, sizeof(T));
}

}  // namespace

TEST_CASE("face area and normal") {
  const TriangleMesh sq = make_unit_square();
  CHECK(sq.face_area(0) == doctest::Approx(0.5));
  CHECK(sq.surface_area() == doctest::Approx(1.0));
  CHECK((sq.face_normal(1) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("OBJ: triangles, quads, slashes and negative indices") {
  std::istringstream in(
      "# comment\n"
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
      "vn 0 0 1\n"
      "f 1/1/1 2//1 3 4\n"
      "f -4 -3 -2\n");
  const TriangleMesh m = read_obj(in, 2.0);
  REQUIRE(m.vertices.size() == 4);
  CHECK(m.vertices[2] == Eigen::Vector3d(2, 2, 0));
  REQUIRE(m.faces.size() == 3);  // quad fan-triangulated into two, plus one
  CHECK(m.faces[0] == std::array<std::uint32_t, 3>{0, 1, 2});
  CHECK(m.faces[1] == std::array<std::uint32_t, 3>{0, 2, 3});
  CHECK(m.faces[2] == std::array<std::uint32_t, 3>{0, 1, 2});
}

TEST_CASE("OBJ: degenerate faces are dropped") {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 4\n");
  const TriangleMesh m = read_obj(in);
  REQUIRE(m.faces.size() == 1);
  CHECK(m.faces[0] == std::array<std::uint32_t, 3>{0, 1, 3});
}

TEST_CASE("OBJ: malformed input throws MeshLoad") {
  for (const char* text : {"v 0 0\n", "v 0 0 0\nf 1 2 3\n", "v 0 0 0\nv 1 0 0\nf 1 2\n"}) {
    std::istringstream in(text);
    try {
      read_obj(in);
      FAIL("expected an exception for: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMeshLoad);
    }
  }
}

TEST_CASE("OBJ write/read round trip is exact") {
  const TriangleMesh m = make_engine_block();
  std::stringstream s;
  write_obj(m, s);
  CHECK(same_mesh(read_obj(s), m));
}

TEST_CASE("PLY ascii with a quad") {
  std::istringstream in(
      "ply\nformat ascii 1.0\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
      "0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
  const TriangleMesh m = read_ply(in);
  CHECK(m.vertices.size() == 4);
  CHECK(m.faces.size() == 2);
  CHECK(m.surface_area() == doctest::Approx(1.0));
}

TEST_CASE("PLY binary little endian with extra properties") {
  std::string data =
      "ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty double x\nproperty double y\n"
      "property double z\nproperty uchar red\nelement face 1\nproperty list uchar uint vertex_indices\n"
      "end_header\n";
  const double v[3][3] = {{0, 0, 0}, {0.5, 0, 0}, {0, 0.25, 0}};
  for (const auto& p : v) {
    for (double c : p) put_le(data, c);
    put_le<std::uint8_t>(data, 200);
  }
  put_le<std::uint8_t>(data, 3);
  for (std::uint32_t i : {0u, 1u, 2u}) put_le(data, i);
  std::istringstream in(data);
  const TriangleMesh m = read_ply(in, 2.0);
  REQUIRE(m.faces.size() == 1);
  CHECK(m.vertices[1] == Eigen::Vector3d(1, 0, 0));
  CHECK(m.face_area(0) == doctest::Approx(0.25));
}

TEST_CASE("PLY errors") {
  std::istringstream bad_magic("plx\n");
  CHECK_THROWS_AS(read_ply(bad_magic), Error);
  std::istringstream out_of_range(
      "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n");
  CHECK_THROWS_AS(read_ply(out_of_range), Error);
}

TEST_CASE("load_mesh: missing file, unknown extension, scale") {
  const auto dir = std::filesystem::temp_directory_path() / "gapf_test_mesh";
  std::filesystem::create_directories(dir);
  try {
    load_mesh(dir / "does_not_exist.obj");
    FAIL("expected MeshLoad");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMeshLoad);
    CHECK(std::string(e.what()).find("does_not_exist.obj") != std::string::npos);
  }
  {
    std::ofstream f(dir / "mesh.stl");
    f << "solid\n";
  }
  CHECK_THROWS_AS(load_mesh(dir / "mesh.stl"), Error);
  {
    std::ofstream f(dir / "square.obj");
    write_obj(make_unit_square(), f);
  }
  CHECK(load_mesh(dir / "square.obj", 0.001).surface_area() == doctest::Approx(1e-6));
  std::filesystem::remove_all(dir);
}

TEST_CASE("primitives are closed and outward-wound") {
  const double pi = M_PI;
  CHECK(signed_volume(make_box({1, 2, 3}, {0.1, 0.2, 0.3})) == doctest::Approx(0.006));
  CHECK(make_box({0, 0, 0}, {1, 2, 3}).surface_area() == doctest::Approx(22.0));
  // A regular 64-gon prism approximates the cylinder volume from below.
  const double prism = 0.5 * 64 * std::sin(2 * pi / 64) * 0.04 * 0.3;
  CHECK(signed_volume(make_cylinder({0, 0, 0}, 0.2, 0.3, 64)) == doctest::Approx(prism));
  const TriangleMesh sphere = make_icosphere(0.1, 3);
  CHECK(sphere.faces.size() == 20 * 64);
  for (const auto& v : sphere.vertices) CHECK(v.norm() == doctest::Approx(0.1));
  CHECK(signed_volume(sphere) > 0.97 * 4.0 / 3.0 * pi * 1e-3);
  CHECK(signed_volume(sphere) < 4.0 / 3.0 * pi * 1e-3);
}

TEST_CASE("engine block: desk scale, closed union of outward parts") {
  const TriangleMesh m = make_engine_block();
  Eigen::Vector3d lo = m.vertices[0], hi = m.vertices[0];
  for (const auto& v : m.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Eigen::Vector3d extent = hi - lo;
  CHECK(extent.x() == doctest::Approx(0.34).epsilon(0.1));
  CHECK(extent.y() == doctest::Approx(0.20).epsilon(0.1));
  CHECK(extent.z() == doctest::Approx(0.19).epsilon(0.1));
  CHECK(signed_volume(m) > 0);
  for (std::size_t f = 0; f < m.faces.size(); ++f) REQUIRE(m.face_area(f) > 0);
}
