#include <doctest.h>

#include <limits>
#include <random>

#include "gapf/kdtree.hpp"
#include "gapf/random.hpp"

using namespace gapf;

namespace {

// Lexicographic minimum of (squared distance, position) within the bound.
std::optional<KdTree::Neighbor> brute_force(const std::vector<Eigen::Vector3d>& pts, const Eigen::Vector3d& q,
                                            double max_distance) {
  std::optional<KdTree::Neighbor> best;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = pts[i].x() - q.x(), dy = pts[i].y() - q.y(), dz = pts[i].z() - q.z();
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 > max_distance * max_distance) continue;
    if (!best || d2 < best->squared_distance) best = KdTree::Neighbor{i, d2};
  }
  return best;
}

void check_against_oracle(const std::vector<Eigen::Vector3d>& pts, Rng& rng, double spread, std::size_t leaf) {
  const KdTree tree(pts, leaf);
  REQUIRE(tree.size() == pts.size());
  std::uniform_real_distribution<double> u(-spread, spread);
  for (int i = 0; i < 2000; ++i) {
    Eigen::Vector3d q(u(rng), u(rng), u(rng));
    if (i % 4 == 0 && !pts.empty()) q = pts[rng() % pts.size()];
    for (double bound : {0.0, 0.01, 0.05, 0.5, std::numeric_limits<double>::infinity()}) {
      const auto a = tree.nearest(q, bound);
      const auto b = brute_force(pts, q, bound);
      REQUIRE(a.has_value() == b.has_value());
      if (a) {
        REQUIRE(a->position == b->position);
        REQUIRE(a->squared_distance == b->squared_distance);
      }
    }
  }
}

}  // namespace

TEST_CASE("empty tree finds nothing") {
  const KdTree tree(std::vector<Eigen::Vector3d>{});
  CHECK(tree.size() == 0);
  CHECK_FALSE(tree.nearest({0, 0, 0}, 1.0));
}

TEST_CASE("nearest matches brute force on random clouds") {
  Rng rng = make_stream(51);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (std::size_t n : {1u, 5u, 17u, 300u, 5000u}) {
    std::vector<Eigen::Vector3d> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
    for (std::size_t leaf : {1u, 4u, 16u}) check_against_oracle(pts, rng, 0.25, leaf);
  }
}

TEST_CASE("ties resolve to the lowest position on grids and duplicates") {
  Rng rng = make_stream(52);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      for (int k = 0; k < 6; ++k) pts.emplace_back(0.01 * i, 0.01 * j, 0.01 * k);
  // Duplicates appended at the end must never win a tie.
  for (int i = 0; i < 200; ++i) pts.push_back(pts[static_cast<std::size_t>(i) * 3]);
  check_against_oracle(pts, rng, 0.13, 8);
  const KdTree tree(pts, 8);
  const auto hit = tree.nearest(pts[0], 1.0);
  REQUIRE(hit);
  CHECK(hit->position == 0);
  CHECK(hit->squared_distance == 0.0);
  // Midway between two grid points: equal distance, lower position wins.
  const auto mid = tree.nearest({0.005, 0.0, 0.0}, 1.0);
  REQUIRE(mid);
  CHECK(mid->position == 0);
}

TEST_CASE("planar and degenerate clouds") {
  Rng rng = make_stream(53);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::vector<Eigen::Vector3d> plane(3000), line(500), same(100, Eigen::Vector3d(0.1, 0.1, 0.1));
  for (auto& p : plane) p = {u(rng), u(rng), 0.0};
  for (auto& p : line) p = {u(rng), 0.0, 0.0};
  check_against_oracle(plane, rng, 0.25, 16);
  check_against_oracle(line, rng, 0.25, 16);
  check_against_oracle(same, rng, 0.25, 4);
}
