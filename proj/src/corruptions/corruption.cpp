#include "svwa/corruptions/corruption.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

#include "svwa/error.hpp"
#include "svwa/geometry/sampling.hpp"
#include "svwa/random.hpp"

namespace svwa {

namespace {

struct KindName {
  CorruptionKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 10> kKindNames{{
    {CorruptionKind::kUniform, "uniform"},
    {CorruptionKind::kGaussian, "gaussian"},
    {CorruptionKind::kBackground, "background"},
    {CorruptionKind::kImpulse, "impulse"},
    {CorruptionKind::kUpsampling, "upsampling"},
    {CorruptionKind::kShear, "shear"},
    {CorruptionKind::kRotation, "rotation"},
    {CorruptionKind::kCutout, "cutout"},
    {CorruptionKind::kDensityDec, "density-dec"},
    {CorruptionKind::kDensityInc, "density-inc"},
}};

using Matrix3 = std::array<std::array<double, 3>, 3>;

Point3 transform(const Matrix3& m, const Point3& p) {
  return {m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2], m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2],
          m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2]};
}

// Rodrigues rotation about a unit axis.
Matrix3 axis_rotation(const Point3& axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double t = 1.0 - c;
  const double x = axis[0], y = axis[1], z = axis[2];
  return {{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
           {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
           {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
}

Point3 random_unit_vector(Rng& rng) {
  for (;;) {
    const Point3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-12) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

// k distinct indices of [0, n), ascending (partial Fisher-Yates).
std::vector<std::size_t> random_subset(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Point3 jittered(Rng& rng, const Point3& p, double half_width) {
  return {p[0] + rng.uniform(-half_width, half_width), p[1] + rng.uniform(-half_width, half_width),
          p[2] + rng.uniform(-half_width, half_width)};
}

}  // namespace

std::string_view to_string(CorruptionKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

CorruptionKind parse_corruption_kind(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (kn.name == name) return kn.kind;
  }
  throw ConfigError("unknown corruption kind '" + std::string(name) + "'");
}

std::vector<CorruptionKind> all_corruption_kinds() {
  std::vector<CorruptionKind> out;
  for (const auto& kn : kKindNames) out.push_back(kn.kind);
  return out;
}

CorruptionParams corruption_params(CorruptionKind kind, int severity) {
  if (severity < 1 || severity > 5) throw ConfigError("severity must be in [1, 5], got " + std::to_string(severity));
  (void)kind;
  const double s = severity;
  CorruptionParams p;
  p.noise = 0.01 * s;
  p.ratio = 0.04 * s;
  p.shear = 0.05 * s;
  p.angle = 6.0 * s * std::numbers::pi / 180.0;
  p.radius = 0.1 + 0.04 * s;
  p.keep_fraction = 1.0 - 0.12 * s;
  return p;
}

CorruptionSpec CorruptionSpec::parse(std::string_view text, std::uint64_t seed) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("corruption must be written kind:severity, got '" + std::string(text) + "'");
  }
  CorruptionSpec spec;
  spec.kind = parse_corruption_kind(text.substr(0, colon));
  const std::string_view sev = text.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(sev.data(), sev.data() + sev.size(), spec.severity);
  if (ec != std::errc{} || ptr != sev.data() + sev.size() || spec.severity < 1 || spec.severity > 5) {
    throw ConfigError("corruption severity must be an integer in [1, 5], got '" + std::string(sev) + "'");
  }
  spec.seed = seed;
  return spec;
}

std::string CorruptionSpec::label() const {
  return std::string(to_string(kind)) + ":" + std::to_string(severity);
}

std::size_t scaled_count(double ratio, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
}

PointCloud apply_corruption(const PointCloud& cloud, const CorruptionSpec& spec) {
  return apply_corruption(cloud, spec.kind, corruption_params(spec.kind, spec.severity), spec.seed);
}

PointCloud apply_corruption(const PointCloud& cloud, CorruptionKind kind, const CorruptionParams& params,
                            std::uint64_t seed) {
  require_valid_cloud(cloud);
  Rng rng(seed);
  PointCloud out;
  out.label = cloud.label;
  const std::size_t n = cloud.size();

  switch (kind) {
    case CorruptionKind::kUniform:
      out.points = cloud.points;
      for (Point3& p : out.points) p = jittered(rng, p, params.noise);
      break;

    case CorruptionKind::kGaussian:
      out.points = cloud.points;
      for (Point3& p : out.points) {
        for (double& c : p) c += params.noise * rng.normal();
      }
      break;

    case CorruptionKind::kBackground: {
      out.points = cloud.points;
      const std::size_t extra = scaled_count(params.ratio, n);
      for (std::size_t i = 0; i < extra; ++i) {
        out.points.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
      }
      break;
    }

    case CorruptionKind::kImpulse: {
      out.points = cloud.points;
      const std::size_t hits = std::min(n, scaled_count(params.ratio, n));
      for (std::size_t i : random_subset(rng, n, hits)) {
        const std::size_t axis = rng.index(3);
        out.points[i][axis] += rng.bernoulli(0.5) ? params.noise : -params.noise;
      }
      break;
    }

    case CorruptionKind::kUpsampling: {
      out.points = cloud.points;
      const std::size_t extra = scaled_count(params.ratio, n);
      for (std::size_t i = 0; i < extra; ++i) {
        out.points.push_back(jittered(rng, cloud.points[rng.index(n)], params.duplicate_jitter));
      }
      break;
    }

    case CorruptionKind::kShear: {
      // Unit upper-triangular, so the determinant is exactly 1.
      Matrix3 m{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
      for (auto [r, c] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
        m[r][c] = rng.bernoulli(0.5) ? params.shear : -params.shear;
      }
      out.points.reserve(n);
      for (const Point3& p : cloud.points) out.points.push_back(transform(m, p));
      break;
    }

    case CorruptionKind::kRotation: {
      const Matrix3 m = axis_rotation(random_unit_vector(rng), params.angle);
      out.points.reserve(n);
      for (const Point3& p : cloud.points) out.points.push_back(transform(m, p));
      break;
    }

    case CorruptionKind::kCutout: {
      const Point3 anchor = cloud.points[rng.index(n)];
      const double r2 = params.radius * params.radius;
      for (const Point3& p : cloud.points) {
        if (squared_distance(p, anchor) > r2) out.points.push_back(p);
      }
      if (out.points.empty()) out.points.push_back(anchor);
      break;
    }

    case CorruptionKind::kDensityDec: {
      const auto keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(params.keep_fraction * static_cast<double>(n) + 1e-9)));
      for (std::size_t i : random_subset(rng, n, std::min(keep, n))) out.points.push_back(cloud.points[i]);
      break;
    }

    case CorruptionKind::kDensityInc: {
      out.points = cloud.points;
      const std::size_t extra = std::min(n, scaled_count(params.ratio, n));
      if (extra == 0) break;
      const Point3 anchor = cloud.points[rng.index(n)];
      for (std::size_t i : knn(cloud, anchor, extra)) {
        out.points.push_back(jittered(rng, cloud.points[i], params.duplicate_jitter));
      }
      break;
    }
  }
  return out;
}

std::string_view to_string(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::kJitter: return "jitter";
    case AugmentationKind::kRotationZ: return "rotation-z";
    case AugmentationKind::kHorizontalFlip: return "horizontal-flip";
    case AugmentationKind::kUniformScale: return "uniform-scale";
  }
  return "unknown";
}

std::vector<PointCloud> apply_augmentation(std::span<const PointCloud> batch, const AugmentationSpec& spec) {
  Rng rng(spec.seed);
  std::vector<PointCloud> out(batch.begin(), batch.end());
  for (PointCloud& cloud : out) {
    switch (spec.kind) {
      case AugmentationKind::kJitter:
        for (Point3& p : cloud.points) {
          for (double& c : p) c += std::clamp(spec.jitter_sigma * rng.normal(), -spec.jitter_clip, spec.jitter_clip);
        }
        break;
      case AugmentationKind::kRotationZ: {
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double c = std::cos(a);
        const double s = std::sin(a);
        for (Point3& p : cloud.points) p = {c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]};
        break;
      }
      case AugmentationKind::kHorizontalFlip:
        if (rng.bernoulli(0.5)) {
          for (Point3& p : cloud.points) p[0] = -p[0];
        }
        break;
      case AugmentationKind::kUniformScale: {
        const double f = rng.uniform(0.8, 1.25);
        for (Point3& p : cloud.points) {
          for (double& c : p) c *= f;
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace svwa
