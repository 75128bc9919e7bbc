#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace gapf {

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;

  bool empty() const noexcept { return faces.empty(); }
  double face_area(std::size_t f) const;
  /// Unit normal following the counter-clockwise winding; zero for degenerate faces.
  Eigen::Vector3d face_normal(std::size_t f) const;
  double surface_area() const;
};

/// Drops faces with out-of-range indices or zero area.
TriangleMesh remove_degenerate_faces(TriangleMesh mesh);

/// Loads an ASCII OBJ or an ASCII/binary PLY, chosen by extension. Polygons
/// are fan-triangulated; coordinates are multiplied by `scale`.
/// Throws Error(kMeshLoad) on unreadable or malformed files.
TriangleMesh load_mesh(const std::filesystem::path& path, double scale = 1.0);
TriangleMesh read_obj(std::istream& in, double scale = 1.0);
TriangleMesh read_ply(std::istream& in, double scale = 1.0);

void write_obj(const TriangleMesh& mesh, std::ostream& out);

// Closed primitives with outward-facing counter-clockwise winding.
TriangleMesh make_box(const Eigen::Vector3d& center, const Eigen::Vector3d& size);
TriangleMesh make_cylinder(const Eigen::Vector3d& base_center, double radius, double height, int segments,
                           bool cap_bottom = true, bool cap_top = true);
TriangleMesh make_icosphere(double radius, int subdivisions);
/// Axis-aligned unit square in the z = 0 plane, as two triangles.
TriangleMesh make_unit_square();
void append(TriangleMesh& dst, const TriangleMesh& src);

/// Desk-scale engine-block stand-in (about 0.34 x 0.20 x 0.19 m): a crankcase
/// box with an offset head, bosses and a flange, asymmetric under every
/// rotation about the vertical axis. Origin at the crankcase center.
TriangleMesh make_engine_block();

}  // namespace gapf
