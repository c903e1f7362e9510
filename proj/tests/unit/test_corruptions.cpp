#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "svwa/corruptions/corruption.hpp"
#include "svwa/error.hpp"
#include "svwa/geometry/point_cloud.hpp"
#include "test_util.hpp"

namespace svwa {
namespace {

PointCloud unit_cloud(std::uint64_t seed, std::size_t n = 1000) {
  Rng rng(seed);
  return normalize_cloud(test::random_cloud(rng, n));
}

double dist(const Point3& a, const Point3& b) { return std::sqrt(squared_distance(a, b)); }

TEST(Corruption, NamesRoundTrip) {
  for (CorruptionKind k : all_corruption_kinds()) EXPECT_EQ(parse_corruption_kind(to_string(k)), k);
  EXPECT_EQ(all_corruption_kinds().size(), 10u);
  EXPECT_THROW(parse_corruption_kind("fog"), ConfigError);
}

TEST(Corruption, SpecParsing) {
  const CorruptionSpec s = CorruptionSpec::parse("gaussian:3", 9);
  EXPECT_EQ(s.kind, CorruptionKind::kGaussian);
  EXPECT_EQ(s.severity, 3);
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.label(), "gaussian:3");
  EXPECT_EQ(CorruptionSpec::parse("density-dec:5").label(), "density-dec:5");
  for (const char* bad : {"gaussian", "gaussian:0", "gaussian:6", "gaussian:x", "snow:2", ":3"}) {
    EXPECT_THROW(CorruptionSpec::parse(bad), ConfigError) << bad;
  }
}

TEST(Corruption, SeverityScheduleIsLinearAndIncreasing) {
  for (int s = 1; s <= 5; ++s) {
    EXPECT_DOUBLE_EQ(corruption_params(CorruptionKind::kGaussian, s).noise, 0.01 * s);
    EXPECT_DOUBLE_EQ(corruption_params(CorruptionKind::kBackground, s).ratio, 0.04 * s);
    EXPECT_DOUBLE_EQ(corruption_params(CorruptionKind::kShear, s).shear, 0.05 * s);
    EXPECT_NEAR(corruption_params(CorruptionKind::kRotation, s).angle, 6.0 * s * std::numbers::pi / 180.0, 1e-15);
    EXPECT_DOUBLE_EQ(corruption_params(CorruptionKind::kCutout, s).radius, 0.1 + 0.04 * s);
    EXPECT_DOUBLE_EQ(corruption_params(CorruptionKind::kDensityDec, s).keep_fraction, 1.0 - 0.12 * s);
    if (s > 1) {
      EXPECT_GT(corruption_params(CorruptionKind::kUniform, s).noise,
                corruption_params(CorruptionKind::kUniform, s - 1).noise);
      EXPECT_GT(corruption_params(CorruptionKind::kImpulse, s).ratio,
                corruption_params(CorruptionKind::kImpulse, s - 1).ratio);
    }
  }
  EXPECT_THROW(corruption_params(CorruptionKind::kGaussian, 0), ConfigError);
}

TEST(Corruption, ZeroSigmaGaussianIsIdentity) {
  const PointCloud c = unit_cloud(1);
  CorruptionParams p;
  p.noise = 0.0;
  const PointCloud out = apply_corruption(c, CorruptionKind::kGaussian, p, 5);
  EXPECT_EQ(out.points, c.points);
}

TEST(Corruption, BackgroundAddsCeilRhoN) {
  const PointCloud c = unit_cloud(2);
  CorruptionParams p;
  p.ratio = 0.1;
  const PointCloud out = apply_corruption(c, CorruptionKind::kBackground, p, 3);
  ASSERT_EQ(out.size(), 1100u);
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_EQ(out.points[i], c.points[i]);
  for (std::size_t i = 1000; i < 1100; ++i)
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(out.points[i][k]), 1.0);
  EXPECT_EQ(scaled_count(0.1, 1000), 100u);
  EXPECT_EQ(scaled_count(0.04, 1024), 41u);
  EXPECT_EQ(scaled_count(0.12, 25), 3u);
}

TEST(Corruption, CountContracts) {
  const PointCloud c = unit_cloud(3, 1024);
  for (CorruptionKind k : all_corruption_kinds()) {
    for (int s = 1; s <= 5; ++s) {
      const CorruptionSpec spec{k, s, 77};
      const PointCloud out = apply_corruption(c, spec);
      const CorruptionParams p = corruption_params(k, s);
      ASSERT_GE(out.size(), 1u);
      switch (k) {
        case CorruptionKind::kUniform:
        case CorruptionKind::kGaussian:
        case CorruptionKind::kImpulse:
        case CorruptionKind::kShear:
        case CorruptionKind::kRotation:
          EXPECT_EQ(out.size(), c.size()) << spec.label();
          break;
        case CorruptionKind::kBackground:
        case CorruptionKind::kUpsampling:
          EXPECT_EQ(out.size(), c.size() + scaled_count(p.ratio, c.size())) << spec.label();
          break;
        case CorruptionKind::kDensityInc:
          EXPECT_GT(out.size(), c.size()) << spec.label();
          break;
        case CorruptionKind::kCutout:
        case CorruptionKind::kDensityDec:
          EXPECT_LT(out.size(), c.size()) << spec.label();
          break;
      }
      EXPECT_EQ(apply_corruption(c, spec).points, out.points) << "not deterministic: " << spec.label();
    }
  }
}

TEST(Corruption, NoiseStaysWithinBounds) {
  const PointCloud c = unit_cloud(4);
  const PointCloud uni = apply_corruption(c, CorruptionSpec{CorruptionKind::kUniform, 2, 1});
  for (std::size_t i = 0; i < c.size(); ++i)
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(uni.points[i][k] - c.points[i][k]), 0.02 + 1e-15);

  const PointCloud imp = apply_corruption(c, CorruptionSpec{CorruptionKind::kImpulse, 2, 1});
  std::size_t moved = 0;
  for (std::size_t i = 0; i < c.size(); ++i) moved += imp.points[i] != c.points[i] ? 1 : 0;
  EXPECT_EQ(moved, scaled_count(0.08, c.size()));
}

TEST(Corruption, RotationIsAnIsometry) {
  const PointCloud c = unit_cloud(5, 200);
  for (int s = 1; s <= 5; ++s) {
    const PointCloud r = apply_corruption(c, CorruptionSpec{CorruptionKind::kRotation, s, 10u + s});
    ASSERT_EQ(r.size(), c.size());
    for (std::size_t i = 0; i < 200; i += 7)
      for (std::size_t j = i + 1; j < 200; j += 11)
        EXPECT_NEAR(dist(r.points[i], r.points[j]), dist(c.points[i], c.points[j]), 1e-9);
    EXPECT_NEAR(dist(r.points[0], {0, 0, 0}), dist(c.points[0], {0, 0, 0}), 1e-12);
  }
}

TEST(Corruption, ShearPreservesVolume) {
  // The tetrahedron spanned by the unit axes keeps its volume.
  PointCloud tet;
  tet.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const PointCloud out = apply_corruption(tet, CorruptionSpec{CorruptionKind::kShear, 4, 3});
  auto sub = [](const Point3& a, const Point3& b) { return Point3{a[0] - b[0], a[1] - b[1], a[2] - b[2]}; };
  const Point3 a = sub(out.points[1], out.points[0]), b = sub(out.points[2], out.points[0]),
               c = sub(out.points[3], out.points[0]);
  const double det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                     a[2] * (b[0] * c[1] - b[1] * c[0]);
  EXPECT_NEAR(det, 1.0, 1e-12);
  EXPECT_NE(out.points[2], tet.points[2]);
}

TEST(Corruption, CutoutNeverEmptiesTheCloud) {
  PointCloud tiny;
  tiny.points = {{0.0, 0.0, 0.0}, {0.01, 0.0, 0.0}};
  CorruptionParams p;
  p.radius = 10.0;
  const PointCloud out = apply_corruption(tiny, CorruptionKind::kCutout, p, 1);
  EXPECT_EQ(out.size(), 1u);
  const PointCloud c = unit_cloud(6);
  const PointCloud cut = apply_corruption(c, CorruptionSpec{CorruptionKind::kCutout, 3, 2});
  EXPECT_LT(cut.size(), c.size());
}

TEST(Corruption, DensityDecreaseKeepsOrderedSubset) {
  const PointCloud c = unit_cloud(7);
  const PointCloud out = apply_corruption(c, CorruptionSpec{CorruptionKind::kDensityDec, 2, 4});
  EXPECT_EQ(out.size(), 760u);
  std::size_t j = 0;
  for (const Point3& p : out.points) {
    while (j < c.size() && c.points[j] != p) ++j;
    ASSERT_LT(j, c.size()) << "output point not found in order";
    ++j;
  }
}

TEST(Corruption, LabelIsKept) {
  PointCloud c = unit_cloud(8, 50);
  c.label = 3;
  for (CorruptionKind k : all_corruption_kinds()) {
    EXPECT_EQ(apply_corruption(c, CorruptionSpec{k, 2, 1}).label, std::optional<int>(3));
  }
}

TEST(Augmentation, FlipTwiceIsIdentity) {
  const std::vector<PointCloud> batch{unit_cloud(9, 40), unit_cloud(10, 40), unit_cloud(11, 40)};
  const AugmentationSpec spec{AugmentationKind::kHorizontalFlip, 5};
  const std::vector<PointCloud> twice = apply_augmentation(apply_augmentation(batch, spec), spec);
  for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(twice[i].points, batch[i].points);
}

TEST(Augmentation, FlipNegatesXOnly) {
  std::vector<PointCloud> batch;
  for (std::uint64_t s = 0; s < 16; ++s) batch.push_back(unit_cloud(20 + s, 10));
  const std::vector<PointCloud> out = apply_augmentation(batch, {AugmentationKind::kHorizontalFlip, 1});
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const bool f = out[i].points[0][0] == -batch[i].points[0][0] && batch[i].points[0][0] != 0.0;
    flipped += f ? 1 : 0;
    for (std::size_t j = 0; j < 10; ++j) {
      EXPECT_EQ(out[i].points[j][0], f ? -batch[i].points[j][0] : batch[i].points[j][0]);
      EXPECT_EQ(out[i].points[j][1], batch[i].points[j][1]);
      EXPECT_EQ(out[i].points[j][2], batch[i].points[j][2]);
    }
  }
  EXPECT_GT(flipped, 0u);
  EXPECT_LT(flipped, batch.size());
}

TEST(Augmentation, ZeroJitterIsIdentity) {
  const std::vector<PointCloud> batch{unit_cloud(12, 30)};
  AugmentationSpec spec{AugmentationKind::kJitter, 3};
  spec.jitter_sigma = 0.0;
  EXPECT_EQ(apply_augmentation(batch, spec)[0].points, batch[0].points);
}

TEST(Augmentation, JitterIsClipped) {
  const std::vector<PointCloud> batch{unit_cloud(13, 500)};
  AugmentationSpec spec{AugmentationKind::kJitter, 3};
  spec.jitter_sigma = 1.0;
  const PointCloud out = apply_augmentation(batch, spec)[0];
  for (std::size_t i = 0; i < 500; ++i)
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(out.points[i][k] - batch[0].points[i][k]), 0.05 + 1e-15);
}

TEST(Augmentation, ScaleIsASimilarity) {
  const std::vector<PointCloud> batch{unit_cloud(14, 100), unit_cloud(15, 100)};
  const std::vector<PointCloud> out = apply_augmentation(batch, {AugmentationKind::kUniformScale, 8});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double factor = dist(out[i].points[0], {0, 0, 0}) / dist(batch[i].points[0], {0, 0, 0});
    EXPECT_GE(factor, 0.8 - 1e-12);
    EXPECT_LE(factor, 1.25 + 1e-12);
    const PointCloud a = normalize_cloud(out[i]), b = normalize_cloud(batch[i]);
    for (std::size_t j = 0; j < 100; ++j)
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.points[j][k], b.points[j][k], 1e-9);
  }
}

TEST(Augmentation, RotationZKeepsHeightAndRadius) {
  const std::vector<PointCloud> batch{unit_cloud(16, 50)};
  const PointCloud out = apply_augmentation(batch, {AugmentationKind::kRotationZ, 2})[0];
  for (std::size_t j = 0; j < 50; ++j) {
    const Point3& p = batch[0].points[j];
    const Point3& q = out.points[j];
    EXPECT_EQ(q[2], p[2]);
    EXPECT_NEAR(std::hypot(q[0], q[1]), std::hypot(p[0], p[1]), 1e-12);
  }
}

TEST(Augmentation, DeterministicPerSeed) {
  const std::vector<PointCloud> batch{unit_cloud(17, 50), unit_cloud(18, 50)};
  for (AugmentationKind k : {AugmentationKind::kJitter, AugmentationKind::kRotationZ,
                             AugmentationKind::kHorizontalFlip, AugmentationKind::kUniformScale}) {
    const auto a = apply_augmentation(batch, {k, 4});
    const auto b = apply_augmentation(batch, {k, 4});
    const auto c = apply_augmentation(batch, {k, 5});
    EXPECT_EQ(a[1].points, b[1].points);
    if (k != AugmentationKind::kHorizontalFlip) EXPECT_NE(a[1].points, c[1].points);
  }
}

}  // namespace
}  // namespace svwa
