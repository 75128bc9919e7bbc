#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace gapf {

/// Ordered 3-D points with a provenance index per point (for synthetic views:
/// the index of the sampled model point it came from).
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<std::int64_t> indices;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }

  void reserve(std::size_t n) {
    points.reserve(n);
    indices.reserve(n);
  }
  void push_back(const Eigen::Vector3d& p, std::int64_t index) {
    points.push_back(p);
    indices.push_back(index);
  }

  /// Indices 0..n-1.
  static PointCloud from_points(std::vector<Eigen::Vector3d> pts);
};

Eigen::Vector3d centroid(const PointCloud& cloud);
/// Mean Euclidean distance of the points from the frame origin.
double mean_distance(const PointCloud& cloud);

/// ASCII PLY with double x, y, z and an int provenance index per vertex.
/// Values are printed with 17 significant digits.
void write_ply(const PointCloud& cloud, std::ostream& out);

}  // namespace gapf
