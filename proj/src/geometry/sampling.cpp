#include "svwa/geometry/sampling.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "svwa/error.hpp"
#include "svwa/random.hpp"

namespace svwa {

std::vector<std::size_t> farthest_point_sample(const PointCloud& cloud, std::size_t count,
                                               std::size_t start_index) {
  const std::size_t n = cloud.size();
  if (count < 1 || count > n) {
    throw SizeError("farthest_point_sample: cannot select " + std::to_string(count) + " of " +
                    std::to_string(n) + " points");
  }
  if (start_index >= n) {
    throw SizeError("farthest_point_sample: start index " + std::to_string(start_index) + " out of range");
  }

  // Coordinates split per axis so the distance update vectorizes. Selected
  // points get nearest = -1, which no squared distance can undercut.
  std::vector<double> xs(n), ys(n), zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = cloud.points[i][0];
    ys[i] = cloud.points[i][1];
    zs[i] = cloud.points[i][2];
  }
  std::vector<std::size_t> selected;
  selected.reserve(count);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  std::size_t current = start_index;
  for (std::size_t step = 0; step < count; ++step) {
    selected.push_back(current);
    nearest[current] = -1.0;
    if (step + 1 == count) break;

    const double cx = xs[current], cy = ys[current], cz = zs[current];
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = xs[i] - cx, dy = ys[i] - cy, dz = zs[i] - cz;
      const double d = dx * dx + dy * dy + dz * dz;
      nearest[i] = d < nearest[i] ? d : nearest[i];
    }
    std::size_t best = 0;
    double best_dist = nearest[0];
    for (std::size_t i = 1; i < n; ++i) {
      if (nearest[i] > best_dist) {
        best_dist = nearest[i];
        best = i;
      }
    }
    current = best;
  }
  return selected;
}

std::vector<std::size_t> knn(const PointCloud& cloud, const Point3& query, std::size_t k) {
  const std::size_t n = cloud.size();
  if (k < 1 || k > n) {
    throw SizeError("knn: cannot take " + std::to_string(k) + " neighbours from " + std::to_string(n) + " points");
  }
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = squared_distance(cloud.points[i], query);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
  order.resize(k);
  return order;
}

PatchSet patchify(const PointCloud& cloud, std::size_t num_centers, std::size_t patch_size, std::uint64_t seed) {
  require_valid_cloud(cloud);
  if (patch_size < 1 || patch_size > cloud.size()) {
    throw SizeError("patchify: patch size " + std::to_string(patch_size) + " for a cloud of " +
                    std::to_string(cloud.size()) + " points");
  }
  Rng rng(seed);
  const std::size_t start = rng.index(cloud.size());

  PatchSet out;
  out.patch_size = patch_size;
  out.variation_seed = seed;
  out.center_indices = farthest_point_sample(cloud, num_centers, start);
  out.centers.reserve(num_centers);
  out.patches.reserve(num_centers * patch_size);
  for (std::size_t idx : out.center_indices) {
    const Point3& c = cloud.points[idx];
    out.centers.push_back(c);
    if (patch_size == 1) {
      out.patches.push_back(c);
      continue;
    }
    for (std::size_t j : knn(cloud, c, patch_size)) out.patches.push_back(cloud.points[j]);
  }
  return out;
}

VariationSet generate_variations(std::span<const PointCloud> batch, std::size_t num_variations,
                                 std::size_t num_centers, std::size_t patch_size, std::uint64_t base_seed,
                                 VariationSeeds seeds) {
  if (num_variations < 1) throw SizeError("generate_variations: need at least one variation");
  VariationSet out;
  out.variations.reserve(num_variations);
  for (std::size_t v = 0; v < num_variations; ++v) {
    const std::uint64_t seed = mix_seed(base_seed, seeds == VariationSeeds::kDistinct ? v : 0);
    Variation variation;
    variation.seed = seed;
    variation.clouds.reserve(batch.size());
    for (const PointCloud& cloud : batch) variation.clouds.push_back(patchify(cloud, num_centers, patch_size, seed));
    out.seeds.push_back(seed);
    out.variations.push_back(std::move(variation));
  }
  return out;
}

}  // namespace svwa
