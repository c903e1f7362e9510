#include "svwa/geometry/point_cloud.hpp"

#include <cmath>

#include "svwa/error.hpp"

namespace svwa {

void require_valid_cloud(const PointCloud& cloud) {
  if (cloud.points.empty()) throw SizeError("point cloud is empty");
  for (const Point3& p : cloud.points) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
      throw NumericError("point cloud has a non-finite coordinate");
    }
  }
}

PointCloud normalize_cloud(const PointCloud& cloud) {
  require_valid_cloud(cloud);
  const double n = static_cast<double>(cloud.size());
  Point3 centroid{0.0, 0.0, 0.0};
  for (const Point3& p : cloud.points) {
    for (int a = 0; a < 3; ++a) centroid[a] += p[a];
  }
  for (double& c : centroid) c /= n;

  PointCloud out;
  out.label = cloud.label;
  out.points.reserve(cloud.size());
  double max_sq = 0.0;
  for (const Point3& p : cloud.points) {
    const Point3 q{p[0] - centroid[0], p[1] - centroid[1], p[2] - centroid[2]};
    max_sq = std::max(max_sq, q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
    out.points.push_back(q);
  }
  if (max_sq > 0.0) {
    const double scale = 1.0 / std::sqrt(max_sq);
    for (Point3& p : out.points) {
      for (double& c : p) c *= scale;
    }
  }
  return out;
}

}  // namespace svwa
