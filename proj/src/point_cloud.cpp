#include "gapf/point_cloud.hpp"

#include <cstdio>
#include <numeric>
#include <ostream>

namespace gapf {

PointCloud PointCloud::from_points(std::vector<Eigen::Vector3d> pts) {
  PointCloud cloud;
  cloud.indices.resize(pts.size());
  std::iota(cloud.indices.begin(), cloud.indices.end(), std::int64_t{0});
  cloud.points = std::move(pts);
  return cloud;
}

Eigen::Vector3d centroid(const PointCloud& cloud) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) sum += p;
  return cloud.empty() ? sum : Eigen::Vector3d(sum / static_cast<double>(cloud.size()));
}

double mean_distance(const PointCloud& cloud) {
  if (cloud.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : cloud.points) sum += p.norm();
  return sum / static_cast<double>(cloud.size());
}

void write_ply(const PointCloud& cloud, std::ostream& out) {
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\nproperty int index\n"
      << "end_header\n";
  char line[128];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    std::snprintf(line, sizeof line, "%.17g %.17g %.17g %lld\n", p.x(), p.y(), p.z(),
                  static_cast<long long>(cloud.indices[i]));
    out << line;
  }
}

}  // namespace gapf
