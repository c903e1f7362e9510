#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "svwa/geometry/point_cloud.hpp"

namespace svwa {

enum class ShapeClass : int {
  kSphere = 0,
  kCube,
  kCylinder,
  kCone,
  kTorus,
  kPlane,
  kHelix,
  kPyramid,
};

inline constexpr std::size_t kNumShapeClasses = 8;

std::string_view to_string(ShapeClass shape);
std::array<ShapeClass, kNumShapeClasses> all_shape_classes();

struct ShapeOptions {
  /// Random anisotropic scale, a tilt about x and a rotation about z. With
  /// the default tilt range the shape axis points in any direction, which is
  /// what keeps the classes from being separable by orientation alone.
  bool nuisance = true;
  double min_scale = 0.75;  // per-axis scale factor range
  double max_scale = 1.25;
  double max_tilt_deg = 180.0;  // tilt uniform in [-max, max]
};

/// Surface samples of one procedural shape, nuisance-transformed and
/// unit-normalized, with coordinates rounded to float precision. The label
/// is the class index. Requires n_points >= 8.
PointCloud generate_shape(ShapeClass shape, std::size_t n_points, std::uint64_t seed, const ShapeOptions& options = {});

}  // namespace svwa
