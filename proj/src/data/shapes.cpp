#include "svwa/data/shapes.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "svwa/error.hpp"
#include "svwa/random.hpp"

namespace svwa {

namespace {

constexpr double kPi = std::numbers::pi;

Point3 sphere_point(Rng& rng) {
  for (;;) {
    const Point3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-12) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

Point3 cube_point(Rng& rng) {
  const std::size_t face = rng.index(6);
  const double u = rng.uniform(-1.0, 1.0);
  const double v = rng.uniform(-1.0, 1.0);
  const double side = face % 2 == 0 ? 1.0 : -1.0;
  switch (face / 2) {
    case 0: return {side, u, v};
    case 1: return {u, side, v};
    default: return {u, v, side};
  }
}

// Radius 1, height 2; caps chosen in proportion to their area.
Point3 cylinder_point(Rng& rng) {
  const double lateral = 2.0 * kPi * 2.0;
  const double caps = 2.0 * kPi;
  const double t = rng.uniform(0.0, 2.0 * kPi);
  if (rng.uniform() * (lateral + caps) < lateral) return {std::cos(t), std::sin(t), rng.uniform(-1.0, 1.0)};
  const double r = std::sqrt(rng.uniform());
  return {r * std::cos(t), r * std::sin(t), rng.bernoulli(0.5) ? 1.0 : -1.0};
}

// Apex (0, 0, 1), base radius 1 at z = -1.
Point3 cone_point(Rng& rng) {
  const double slant = std::sqrt(1.0 + 4.0);
  const double lateral = kPi * slant;
  const double base = kPi;
  const double t = rng.uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(rng.uniform());
  if (rng.uniform() * (lateral + base) < lateral) return {r * std::cos(t), r * std::sin(t), 1.0 - 2.0 * r};
  return {r * std::cos(t), r * std::sin(t), -1.0};
}

// Major radius 1, minor radius 0.35; rejection keeps the density uniform.
Point3 torus_point(Rng& rng) {
  constexpr double kMajor = 1.0;
  constexpr double kMinor = 0.35;
  for (;;) {
    const double u = rng.uniform(0.0, 2.0 * kPi);
    const double v = rng.uniform(0.0, 2.0 * kPi);
    if (rng.uniform() * (kMajor + kMinor) <= kMajor + kMinor * std::cos(v)) {
      const double w = kMajor + kMinor * std::cos(v);
      return {w * std::cos(u), w * std::sin(u), kMinor * std::sin(v)};
    }
  }
}

Point3 plane_point(Rng& rng) { return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0}; }

// Two turns of radius 1 over height 2, thickened into a thin tube.
Point3 helix_point(Rng& rng) {
  constexpr double kTube = 0.06;
  const double t = rng.uniform(0.0, 4.0 * kPi);
  const Point3 c{std::cos(t), std::sin(t), t / (2.0 * kPi) - 1.0};
  const Point3 offset = sphere_point(rng);
  return {c[0] + kTube * offset[0], c[1] + kTube * offset[1], c[2] + kTube * offset[2]};
}

// Square base [-1, 1]^2 at z = -1, apex (0, 0, 1).
Point3 pyramid_point(Rng& rng) {
  const double face_height = std::sqrt(1.0 + 4.0);
  const double side_area = 0.5 * 2.0 * face_height;
  const double base_area = 4.0;
  if (rng.uniform() * (4.0 * side_area + base_area) < base_area) {
    return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), -1.0};
  }
  // Uniform point in the triangle with vertices a, b, apex.
  double s = rng.uniform();
  double t = rng.uniform();
  if (s + t > 1.0) {
    s = 1.0 - s;
    t = 1.0 - t;
  }
  static constexpr Point3 kCorners[4] = {{1, 1, -1}, {-1, 1, -1}, {-1, -1, -1}, {1, -1, -1}};
  const std::size_t face = rng.index(4);
  const Point3& a = kCorners[face];
  const Point3& b = kCorners[(face + 1) % 4];
  const Point3 apex{0.0, 0.0, 1.0};
  Point3 p;
  for (int i = 0; i < 3; ++i) p[i] = a[i] + s * (b[i] - a[i]) + t * (apex[i] - a[i]);
  return p;
}

Point3 sample(ShapeClass shape, Rng& rng) {
  switch (shape) {
    case ShapeClass::kSphere: return sphere_point(rng);
    case ShapeClass::kCube: return cube_point(rng);
    case ShapeClass::kCylinder: return cylinder_point(rng);
    case ShapeClass::kCone: return cone_point(rng);
    case ShapeClass::kTorus: return torus_point(rng);
    case ShapeClass::kPlane: return plane_point(rng);
    case ShapeClass::kHelix: return helix_point(rng);
    case ShapeClass::kPyramid: return pyramid_point(rng);
  }
  throw ConfigError("unknown shape class");
}

}  // namespace

std::string_view to_string(ShapeClass shape) {
  static constexpr std::string_view kNames[kNumShapeClasses] = {"sphere", "cube",  "cylinder", "cone",
                                                                 "torus",  "plane", "helix",    "pyramid"};
  return kNames[static_cast<int>(shape)];
}

std::array<ShapeClass, kNumShapeClasses> all_shape_classes() {
  return {ShapeClass::kSphere, ShapeClass::kCube,  ShapeClass::kCylinder, ShapeClass::kCone,
          ShapeClass::kTorus,  ShapeClass::kPlane, ShapeClass::kHelix,    ShapeClass::kPyramid};
}

PointCloud generate_shape(ShapeClass shape, std::size_t n_points, std::uint64_t seed, const ShapeOptions& options) {
  if (n_points < 8) throw SizeError("generate_shape needs at least 8 points, got " + std::to_string(n_points));
  Rng rng(seed);
  PointCloud cloud;
  cloud.label = static_cast<int>(shape);
  cloud.points.reserve(n_points);
  if (shape == ShapeClass::kSphere) {
    // Antipodal pairs put the centroid exactly at the origin.
    while (cloud.points.size() + 2 <= n_points) {
      const Point3 p = sphere_point(rng);
      cloud.points.push_back(p);
      cloud.points.push_back({-p[0], -p[1], -p[2]});
    }
    if (cloud.points.size() < n_points) cloud.points.push_back(sphere_point(rng));
  } else {
    for (std::size_t i = 0; i < n_points; ++i) cloud.points.push_back(sample(shape, rng));
  }

  if (options.nuisance) {
    const double lo = options.min_scale, hi = options.max_scale;
    const Point3 scale{rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
    const double tilt = rng.uniform(-options.max_tilt_deg, options.max_tilt_deg) * kPi / 180.0;
    const double yaw = rng.uniform(0.0, 2.0 * kPi);
    const double ct = std::cos(tilt), st = std::sin(tilt);
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    for (Point3& p : cloud.points) {
      const Point3 s{p[0] * scale[0], p[1] * scale[1], p[2] * scale[2]};
      const Point3 t{s[0], ct * s[1] - st * s[2], st * s[1] + ct * s[2]};
      p = {cy * t[0] - sy * t[1], sy * t[0] + cy * t[1], t[2]};
    }
  }

  PointCloud out = normalize_cloud(cloud);
  for (Point3& p : out.points) {
    for (double& c : p) c = static_cast<double>(static_cast<float>(c));
  }
  return out;
}

}  // namespace svwa
