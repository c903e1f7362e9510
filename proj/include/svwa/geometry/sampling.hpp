#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "svwa/geometry/point_cloud.hpp"

namespace svwa {

/// Greedy farthest point sampling. result[0] = start_index; every later pick
/// maximizes the distance to its nearest already-selected point, ties going to
/// the smallest index. Distances are compared squared, which orders points the
/// same way as the Euclidean norm.
std::vector<std::size_t> farthest_point_sample(const PointCloud& cloud, std::size_t count,
                                               std::size_t start_index);

/// The `k` points closest to `query`, ordered by (distance, index).
std::vector<std::size_t> knn(const PointCloud& cloud, const Point3& query, std::size_t k);

/// FPS centers and their KNN patches for one cloud.
struct PatchSet {
  std::vector<Point3> centers;              // N
  std::vector<Point3> patches;              // N * K, patch-major
  std::vector<std::size_t> center_indices;  // N, into the source cloud
  std::size_t patch_size = 1;               // K
  std::uint64_t variation_seed = 0;

  std::size_t num_patches() const noexcept { return centers.size(); }
  const Point3& patch_point(std::size_t patch, std::size_t j) const { return patches[patch * patch_size + j]; }
};

/// Start index drawn uniformly from Rng(seed), then FPS for `num_centers`
/// centers and KNN for `patch_size` neighbours. With patch_size == 1 each
/// patch is just its center.
PatchSet patchify(const PointCloud& cloud, std::size_t num_centers, std::size_t patch_size, std::uint64_t seed);

/// One sampling of every cloud in a batch.
struct Variation {
  std::uint64_t seed = 0;
  std::vector<PatchSet> clouds;
};

struct VariationSet {
  std::vector<Variation> variations;
  std::vector<std::uint64_t> seeds;
};

enum class VariationSeeds {
  kDistinct,    // seed_v = mix_seed(base_seed, v)
  kForceEqual,  // every variation uses mix_seed(base_seed, 0); test hook
};

/// V samplings of the batch; variation v patchifies every cloud with seed_v.
VariationSet generate_variations(std::span<const PointCloud> batch, std::size_t num_variations,
                                 std::size_t num_centers, std::size_t patch_size, std::uint64_t base_seed,
                                 VariationSeeds seeds = VariationSeeds::kDistinct);

}  // namespace svwa
