#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svwa/geometry/point_cloud.hpp"

namespace svwa {

enum class CorruptionKind {
  kUniform,
  kGaussian,
  kBackground,
  kImpulse,
  kUpsampling,
  kShear,
  kRotation,
  kCutout,
  kDensityDec,
  kDensityInc,
};

std::string_view to_string(CorruptionKind kind);
/// Accepts the names printed by to_string ("gaussian", "density-dec", ...).
CorruptionKind parse_corruption_kind(std::string_view name);
std::vector<CorruptionKind> all_corruption_kinds();

/// Magnitudes for one severity level. Only the fields a kind uses matter.
struct CorruptionParams {
  double noise = 0.0;           // uniform half-width a, gaussian sigma, impulse offset
  double ratio = 0.0;           // background/upsampling/impulse/density-inc fraction rho
  double shear = 0.0;           // off-diagonal b
  double angle = 0.0;           // rotation, radians
  double radius = 0.0;          // cutout
  double keep_fraction = 1.0;   // density-dec
  double duplicate_jitter = 0.01;  // upsampling/density-inc half-width
};

/// Linear-in-severity schedule, severity in [1, 5]:
/// noise 0.01 s, ratio 0.04 s, shear 0.05 s, angle 6 s degrees,
/// radius 0.1 + 0.04 s, keep fraction 1 - 0.12 s.
CorruptionParams corruption_params(CorruptionKind kind, int severity);

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kGaussian;
  int severity = 1;
  std::uint64_t seed = 0;

  /// "gaussian:3" form. Throws ConfigError.
  static CorruptionSpec parse(std::string_view text, std::uint64_t seed = 0);
  std::string label() const;  // "gaussian:3"
};

/// ceil(ratio * n) with a small tolerance for representation error.
std::size_t scaled_count(double ratio, std::size_t n);

/// Expects a unit-normalized cloud; the result always keeps at least one point.
PointCloud apply_corruption(const PointCloud& cloud, const CorruptionSpec& spec);
/// Explicit magnitudes, bypassing the severity table.
PointCloud apply_corruption(const PointCloud& cloud, CorruptionKind kind, const CorruptionParams& params,
                            std::uint64_t seed);

// ---------------------------------------------------------------------------

enum class AugmentationKind { kJitter, kRotationZ, kHorizontalFlip, kUniformScale };

std::string_view to_string(AugmentationKind kind);

/// jitter: N(0, sigma^2) per coordinate clipped to +-clip; rotation-z: angle
/// uniform in [0, 2pi); flip: negate x with probability 1/2; scale: factor
/// uniform in [0.8, 1.25]. Each cloud of a batch draws independently.
struct AugmentationSpec {
  AugmentationKind kind = AugmentationKind::kJitter;
  std::uint64_t seed = 0;
  double jitter_sigma = 0.01;
  double jitter_clip = 0.05;
};

std::vector<PointCloud> apply_augmentation(std::span<const PointCloud> batch, const AugmentationSpec& spec);

}  // namespace svwa
