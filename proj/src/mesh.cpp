#include "gapf/mesh.hpp"

#include <cmath>
#include <map>

#include <Eigen/Geometry>

#include "gapf/error.hpp"

namespace gapf {

double TriangleMesh::face_area(std::size_t f) const {
  const auto& [a, b, c] = faces[f];
  return 0.5 * (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]).norm();
}

Eigen::Vector3d TriangleMesh::face_normal(std::size_t f) const {
  const auto& [a, b, c] = faces[f];
  const Eigen::Vector3d n = (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]);
  const double len = n.norm();
  return len > 0.0 ? Eigen::Vector3d(n / len) : Eigen::Vector3d::Zero();
}

double TriangleMesh::surface_area() const {
  double sum = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) sum += face_area(f);
  return sum;
}

TriangleMesh remove_degenerate_faces(TriangleMesh mesh) {
  const auto nv = mesh.vertices.size();
  std::vector<std::array<std::uint32_t, 3>> kept;
  kept.reserve(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    if (face[0] >= nv || face[1] >= nv || face[2] >= nv) continue;
    const double area = mesh.face_area(f);
    if (!(area > 0.0) || !std::isfinite(area)) continue;
    kept.push_back(face);
  }
  mesh.faces = std::move(kept);
  return mesh;
}

void append(TriangleMesh& dst, const TriangleMesh& src) {
  const auto offset = static_cast<std::uint32_t>(dst.vertices.size());
  dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
  for (const auto& f : src.faces) dst.faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
}

TriangleMesh make_box(const Eigen::Vector3d& center, const Eigen::Vector3d& size) {
  TriangleMesh m;
  const Eigen::Vector3d h = 0.5 * size;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back(center.x() + ((i & 1) ? h.x() : -h.x()), center.y() + ((i & 2) ? h.y() : -h.y()),
                            center.z() + ((i & 4) ? h.z() : -h.z()));
  }
  // Quads listed counter-clockwise seen from outside.
  const std::array<std::array<std::uint32_t, 4>, 6> quads{{
      {0, 2, 3, 1},  // -z
      {4, 5, 7, 6},  // +z
      {0, 1, 5, 4},  // -y
      {2, 6, 7, 3},  // +y
      {0, 4, 6, 2},  // -x
      {1, 3, 7, 5},  // +x
  }};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

TriangleMesh make_cylinder(const Eigen::Vector3d& base, double radius, double height, int segments, bool cap_bottom,
                           bool cap_top) {
  TriangleMesh m;
  const auto n = static_cast<std::uint32_t>(segments);
  for (std::uint32_t k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * k / n;
    m.vertices.emplace_back(base.x() + radius * std::cos(a), base.y() + radius * std::sin(a), base.z());
  }
  for (std::uint32_t k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * k / n;
    m.vertices.emplace_back(base.x() + radius * std::cos(a), base.y() + radius * std::sin(a), base.z() + height);
  }
  for (std::uint32_t k = 0; k < n; ++k) {
    const std::uint32_t k1 = (k + 1) % n;
    m.faces.push_back({k, k1, n + k1});
    m.faces.push_back({k, n + k1, n + k});
  }
  if (cap_bottom) {
    const auto c = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.push_back(base);
    for (std::uint32_t k = 0; k < n; ++k) m.faces.push_back({c, (k + 1) % n, k});
  }
  if (cap_top) {
    const auto c = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.push_back(base + Eigen::Vector3d(0, 0, height));
    for (std::uint32_t k = 0; k < n; ++k) m.faces.push_back({c, n + k, n + (k + 1) % n});
  }
  return m;
}

TriangleMesh make_icosphere(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& v : m.vertices) v.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      const auto idx = static_cast<std::uint32_t>(m.vertices.size() - 1);
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<std::uint32_t, 3>> faces;
    faces.reserve(m.faces.size() * 4);
    for (const auto& [a, b, c] : m.faces) {
      const auto ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
      faces.push_back({a, ab, ca});
      faces.push_back({b, bc, ab});
      faces.push_back({c, ca, bc});
      faces.push_back({ab, bc, ca});
    }
    m.faces = std::move(faces);
  }
  for (auto& v : m.vertices) v *= radius;
  return m;
}

TriangleMesh make_unit_square() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

TriangleMesh make_engine_block() {
  using V = Eigen::Vector3d;
  TriangleMesh m = make_box(V(0, 0, 0), V(0.30, 0.20, 0.10));                      // crankcase
  append(m, make_box(V(0.03, 0.02, 0.08), V(0.18, 0.12, 0.06)));                    // cylinder head
  append(m, make_cylinder(V(-0.02, 0.045, 0.11), 0.020, 0.030, 32, false, true));   // boss
  append(m, make_cylinder(V(0.085, -0.010, 0.11), 0.015, 0.020, 32, false, true));  // boss
  append(m, make_cylinder(V(-0.10, -0.06, 0.05), 0.025, 0.040, 32, false, true));   // oil filler
  append(m, make_box(V(-0.17, -0.05, -0.02), V(0.04, 0.06, 0.04)));                 // flange
  append(m, make_box(V(0.125, -0.07, 0.065), V(0.04, 0.03, 0.03)));                 // mount
  return m;
}

}  // namespace gapf
