#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "svwa/error.hpp"
#include "svwa/geometry/point_cloud.hpp"
#include "svwa/geometry/sampling.hpp"
#include "test_util.hpp"

namespace svwa {
namespace {

using test::random_cloud;

double dist2(const Point3& a, const Point3& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

// Recomputes every min distance from scratch at every step.
std::vector<std::size_t> brute_fps(const PointCloud& c, std::size_t m, std::size_t start) {
  std::vector<std::size_t> sel{start};
  while (sel.size() < m) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (std::find(sel.begin(), sel.end(), i) != sel.end()) continue;
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t s : sel) d = std::min(d, dist2(c.points[i], c.points[s]));
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    sel.push_back(best);
  }
  return sel;
}

std::vector<std::size_t> brute_knn(const PointCloud& c, const Point3& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < c.size(); ++i) all.push_back({dist2(c.points[i], q), i});
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].second);
  return out;
}

PointCloud cloud_of(std::vector<Point3> pts) {
  PointCloud c;
  c.points = std::move(pts);
  return c;
}

TEST(Fps, FarthestFromOrigin) {
  const PointCloud c = cloud_of({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {10, 0, 0}});
  EXPECT_EQ(farthest_point_sample(c, 2, 0), (std::vector<std::size_t>{0, 3}));
}

TEST(Fps, SingleAndExhaustive) {
  Rng rng(40);
  const PointCloud c = random_cloud(rng, 20);
  EXPECT_EQ(farthest_point_sample(c, 1, 7), (std::vector<std::size_t>{7}));
  std::vector<std::size_t> all = farthest_point_sample(c, 20, 3);
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(all[i], i);
}

TEST(Fps, SizeErrors) {
  Rng rng(41);
  const PointCloud c = random_cloud(rng, 5);
  EXPECT_THROW(farthest_point_sample(c, 6, 0), SizeError);
  EXPECT_THROW(farthest_point_sample(c, 0, 0), SizeError);
  EXPECT_THROW(farthest_point_sample(c, 2, 5), SizeError);
}

TEST(Fps, MatchesBruteForceOracle) {
  Rng rng(42);
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t n = 1 + rng.index(64);
    const PointCloud c = random_cloud(rng, n);
    const std::size_t m = 1 + rng.index(n);
    const std::size_t start = rng.index(n);
    ASSERT_EQ(farthest_point_sample(c, m, start), brute_fps(c, m, start)) << "draw " << draw;
  }
}

TEST(Fps, TiesGoToSmallestIndex) {
  // Grid points with many equal distances, including duplicates.
  PointCloud c;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) c.points.push_back({double(x), double(y), 0.0});
  c.points.push_back({1.0, 1.0, 0.0});
  for (std::size_t start = 0; start < c.size(); ++start) {
    EXPECT_EQ(farthest_point_sample(c, c.size(), start), brute_fps(c, c.size(), start));
  }
}

TEST(Fps, MinDistanceIsNonIncreasing) {
  Rng rng(43);
  for (int draw = 0; draw < 20; ++draw) {
    const PointCloud c = random_cloud(rng, 60);
    const std::vector<std::size_t> sel = farthest_point_sample(c, 30, rng.index(60));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < sel.size(); ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < i; ++j) d = std::min(d, dist2(c.points[sel[i]], c.points[sel[j]]));
      EXPECT_LE(d, prev);
      prev = d;
    }
  }
}

TEST(Knn, Examples) {
  const PointCloud line = cloud_of({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  EXPECT_EQ(knn(line, {1.1, 0, 0}, 2), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(knn(line, {2, 0, 0}, 1), (std::vector<std::size_t>{2}));
  EXPECT_EQ(knn(line, {2.9, 0, 0}, 4), (std::vector<std::size_t>{3, 2, 1, 0}));
  EXPECT_THROW(knn(line, {0, 0, 0}, 5), SizeError);
  EXPECT_THROW(knn(line, {0, 0, 0}, 0), SizeError);
}

TEST(Knn, MatchesFullSort) {
  Rng rng(44);
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t n = 1 + rng.index(64);
    PointCloud c = random_cloud(rng, n);
    if (n > 3) c.points[1] = c.points[2];  // an exact tie
    const Point3 q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const std::size_t k = 1 + rng.index(n);
    ASSERT_EQ(knn(c, q, k), brute_knn(c, q, k));
  }
}

TEST(Patchify, DeterministicAndConsistent) {
  Rng rng(45);
  const PointCloud c = random_cloud(rng, 50);
  const PatchSet a = patchify(c, 10, 4, 99);
  const PatchSet b = patchify(c, 10, 4, 99);
  EXPECT_EQ(a.center_indices, b.center_indices);
  EXPECT_EQ(a.patches, b.patches);
  EXPECT_EQ(a.variation_seed, 99u);

  const std::size_t start = Rng(99).index(50);
  EXPECT_EQ(a.center_indices, farthest_point_sample(c, 10, start));
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(a.centers[i], c.points[a.center_indices[i]]);
    const std::vector<std::size_t> nn = knn(c, a.centers[i], 4);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(a.patch_point(i, j), c.points[nn[j]]);
    EXPECT_EQ(a.patch_point(i, 0), a.centers[i]);  // a center is its own nearest neighbour
  }
}

TEST(Patchify, SinglePointPatchesAreCenters) {
  Rng rng(46);
  const PointCloud c = random_cloud(rng, 1024);
  const PatchSet p = patchify(c, 512, 1, 3);
  EXPECT_EQ(p.patches, p.centers);
  EXPECT_EQ(p.num_patches(), 512u);
  std::set<std::size_t> distinct(p.center_indices.begin(), p.center_indices.end());
  EXPECT_EQ(distinct.size(), 512u);
}

TEST(Patchify, DifferentStartsGiveDifferentCenters) {
  // Asymmetric 10-point cloud: each start index yields its own center set.
  Rng rng(47);
  const PointCloud c = random_cloud(rng, 10);
  std::set<std::vector<std::size_t>> sets;
  for (std::size_t s = 0; s < 10; ++s) sets.insert(farthest_point_sample(c, 3, s));
  EXPECT_GE(sets.size(), 2u);
  std::size_t differ = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    differ += patchify(c, 3, 1, seed).center_indices != patchify(c, 3, 1, 0).center_indices ? 1 : 0;
  }
  EXPECT_GT(differ, 0u);
}

TEST(Variations, SeedsAndShapes) {
  Rng rng(48);
  std::vector<PointCloud> batch{random_cloud(rng, 40), random_cloud(rng, 40), random_cloud(rng, 40)};
  const VariationSet vs = generate_variations(batch, 6, 8, 1, 123);
  ASSERT_EQ(vs.variations.size(), 6u);
  std::set<std::uint64_t> seeds(vs.seeds.begin(), vs.seeds.end());
  EXPECT_EQ(seeds.size(), 6u);
  for (std::size_t v = 0; v < 6; ++v) {
    EXPECT_EQ(vs.seeds[v], mix_seed(123, v));
    ASSERT_EQ(vs.variations[v].clouds.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(vs.variations[v].clouds[i].center_indices,
                patchify(batch[i], 8, 1, vs.seeds[v]).center_indices);
    }
  }
  bool any_differ = false;
  for (std::size_t v = 1; v < 6; ++v) {
    any_differ = any_differ || vs.variations[v].clouds[0].center_indices != vs.variations[0].clouds[0].center_indices;
  }
  EXPECT_TRUE(any_differ);
}

TEST(Variations, SingleVariationAndForcedEqualSeeds) {
  Rng rng(49);
  std::vector<PointCloud> batch{random_cloud(rng, 30), random_cloud(rng, 30)};
  const VariationSet one = generate_variations(batch, 1, 5, 2, 7);
  EXPECT_EQ(one.variations[0].clouds[1].patches, patchify(batch[1], 5, 2, mix_seed(7, 0)).patches);

  const VariationSet same = generate_variations(batch, 6, 5, 2, 7, VariationSeeds::kForceEqual);
  for (std::size_t v = 1; v < 6; ++v) {
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_EQ(same.variations[v].clouds[i].patches, same.variations[0].clouds[i].patches);
    }
  }
}

TEST(NormalizeCloud, Examples) {
  Rng rng(50);
  const PointCloud c = normalize_cloud(random_cloud(rng, 30));
  double max_norm = 0.0;
  Point3 centroid{0, 0, 0};
  for (const Point3& p : c.points) {
    max_norm = std::max(max_norm, std::sqrt(dist2(p, {0, 0, 0})));
    for (int k = 0; k < 3; ++k) centroid[k] += p[k] / 30.0;
  }
  EXPECT_NEAR(max_norm, 1.0, 1e-12);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(centroid[k], 0.0, 1e-12);

  const PointCloud again = normalize_cloud(c);
  PointCloud moved = c;
  for (Point3& p : moved.points) p = {5 * p[0] + 2, 5 * p[1] - 1, 5 * p[2] + 7};
  const PointCloud back = normalize_cloud(moved);
  for (std::size_t i = 0; i < 30; ++i) {
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(again.points[i][k], c.points[i][k], 1e-12);
      EXPECT_NEAR(back.points[i][k], c.points[i][k], 1e-9);
    }
  }

  const PointCloud single = normalize_cloud(cloud_of({{3, 4, 5}}));
  EXPECT_EQ(single.points[0], (Point3{0, 0, 0}));
  const PointCloud same = normalize_cloud(cloud_of({{1, 1, 1}, {1, 1, 1}}));
  EXPECT_EQ(same.points[1], (Point3{0, 0, 0}));
}

TEST(NormalizeCloud, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(normalize_cloud(PointCloud{}), Error);
  EXPECT_THROW(normalize_cloud(cloud_of({{0, std::nan(""), 0}})), Error);
}

}  // namespace
}  // namespace svwa
