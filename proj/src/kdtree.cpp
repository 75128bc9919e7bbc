#include "gapf/kdtree.hpp"

#include <algorithm>
#include <numeric>

#include "gapf/kernels/kernels.hpp"

namespace gapf {

KdTree::KdTree(const std::vector<Eigen::Vector3d>& points, std::size_t leaf_size)
    : leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  const auto n = static_cast<std::uint32_t>(points.size());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  std::vector<Eigen::Vector3d> scratch = points;
  if (n > 0) build(0, n, scratch);
  x_.resize(n);
  y_.resize(n);
  z_.resize(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    x_[s] = points[order_[s]].x();
    y_[s] = points[order_[s]].y();
    z_[s] = points[order_[s]].z();
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, std::vector<Eigen::Vector3d>& pts) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= leaf_size_) {
    // Slot order inside a leaf follows original position so that the
    // first-minimum scan breaks ties by position.
    std::sort(order_.begin() + begin, order_.begin() + end);
    return id;
  }
  Eigen::Vector3d lo = pts[order_[begin]], hi = lo;
  for (std::uint32_t s = begin; s < end; ++s) {
    lo = lo.cwiseMin(pts[order_[s]]);
    hi = hi.cwiseMax(pts[order_[s]]);
  }
  int dim = 0;
  (hi - lo).maxCoeff(&dim);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return pts[a][dim] < pts[b][dim] || (pts[a][dim] == pts[b][dim] && a < b);
                   });
  const double split = pts[order_[mid]][dim];
  const std::int32_t left = build(begin, mid, pts);
  const std::int32_t right = build(mid, end, pts);
  nodes_[id].dim = dim;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::int32_t id, const double* q, double bound2, double cell_d2, double* offset,
                    Neighbor& best, bool& found) const {
  const Node& node = nodes_[id];
  if (node.dim < 0) {
    const std::size_t count = node.end - node.begin;
    const kernels::ConstSoa block{x_.data() + node.begin, y_.data() + node.begin, z_.data() + node.begin};
    const kernels::Nearest hit = kernels::active().nearest_in_block(q, block, count);
    if (hit.position >= count) return;
    const std::size_t position = order_[node.begin + hit.position];
    const double limit = found ? best.squared_distance : bound2;
    if (hit.d2 < limit || (hit.d2 == limit && (!found || position < best.position))) {
      best = {position, hit.d2};
      found = true;
    }
    return;
  }
  // Left holds values <= split, right holds values >= split. cell_d2 is a
  // lower bound on the squared distance from q to the current cell, built
  // from the per-axis offsets to the split planes crossed so far.
  const int dim = node.dim;
  const double diff = q[dim] - node.split;
  const std::int32_t near_child = diff <= 0 ? node.left : node.right;
  const std::int32_t far_child = diff <= 0 ? node.right : node.left;
  search(near_child, q, bound2, cell_d2, offset, best, found);
  const double saved = offset[dim];
  const double far_d2 = cell_d2 - saved * saved + diff * diff;
  const double limit = found ? best.squared_distance : bound2;
  if (far_d2 <= limit) {
    offset[dim] = diff;
    search(far_child, q, bound2, far_d2, offset, best, found);
    offset[dim] = saved;
  }
}

std::optional<KdTree::Neighbor> KdTree::nearest(const Eigen::Vector3d& query, double max_distance) const {
  if (nodes_.empty()) return std::nullopt;
  const double q[3] = {query.x(), query.y(), query.z()};
  Neighbor best{0, 0};
  bool found = false;
  double offset[3] = {0.0, 0.0, 0.0};
  search(0, q, max_distance * max_distance, 0.0, offset, best, found);
  if (!found) return std::nullopt;
  return best;
}

}  // namespace gapf
