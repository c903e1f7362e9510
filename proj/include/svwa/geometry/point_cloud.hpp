#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace svwa {

using Point3 = std::array<double, 3>;

/// Points plus an optional class label.
struct PointCloud {
  std::vector<Point3> points;
  std::optional<int> label;

  std::size_t size() const noexcept { return points.size(); }
};

inline double squared_distance(const Point3& a, const Point3& b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

/// Throws SizeError on an empty cloud, NumericError on a non-finite coordinate.
void require_valid_cloud(const PointCloud& cloud);

/// Translate the centroid to the origin and scale the farthest point to norm 1.
/// A cloud whose points all coincide is returned centered and unscaled.
PointCloud normalize_cloud(const PointCloud& cloud);

}  // namespace svwa
