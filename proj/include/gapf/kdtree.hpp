#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gapf/point_cloud.hpp"

namespace gapf {

/// Static 3-d tree over a point cloud with exact bounded nearest-neighbour
/// queries. Immutable after construction; concurrent queries are safe.
class KdTree {
 public:
  struct Neighbor {
    std::size_t position;  // position in the indexed cloud
    double squared_distance;
  };

  KdTree() = default;
  explicit KdTree(const std::vector<Eigen::Vector3d>& points, std::size_t leaf_size = 16);

  /// Nearest point with distance <= max_distance; ties resolve to the lowest
  /// position.
  std::optional<Neighbor> nearest(const Eigen::Vector3d& query, double max_distance) const;

  std::size_t size() const noexcept { return order_.size(); }

 private:
  struct Node {
    double split = 0;
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
    int dim = -1;  // -1 for leaves
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Eigen::Vector3d>& scratch);
  void search(std::int32_t node, const double* q, double bound2, double cell_d2, double* offset, Neighbor& best,
              bool& found) const;

  std::size_t leaf_size_ = 16;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;  // tree slot -> original position
  std::vector<double> x_, y_, z_;     // coordinates in tree-slot order
};

/// An observation cloud and its spatial index, built once per frame and
/// shared read-only by every particle.
struct ObservationIndex {
  PointCloud cloud;
  KdTree tree;

  explicit ObservationIndex(PointCloud c) : cloud(std::move(c)), tree(cloud.points) {}
};

}  // namespace gapf
