#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "svwa/data/shapes.hpp"
#include "svwa/geometry/point_cloud.hpp"

namespace svwa {

enum class Split { kTrain, kTest };

struct Dataset {
  std::size_t num_classes = 0;
  std::vector<PointCloud> clouds;  // every cloud labeled
  std::vector<std::uint32_t> train_indices;
  std::vector<std::uint32_t> test_indices;
  std::optional<std::uint64_t> seed;  // not stored in the files

  const std::vector<std::uint32_t>& indices(Split split) const {
    return split == Split::kTrain ? train_indices : test_indices;
  }
  /// Throws Error on labels outside [0, num_classes) or overlapping splits.
  void validate() const;
};

/// Balanced synthetic dataset over the 8 procedural shape classes. Clouds are
/// ordered class-major within each split: train first, then test.
Dataset make_dataset(std::size_t per_class_train, std::size_t per_class_test, std::size_t n_points,
                     std::uint64_t seed, const ShapeOptions& options = {});

inline constexpr std::uint16_t kDatasetVersion = 1;

/// "PCD3" file: u16 version, u32 num_classes, u32 num_clouds, then per cloud
/// u32 label, u32 n_points, n_points x 3 f32. Little-endian.
std::vector<std::uint8_t> encode_dataset(const Dataset& dataset);
/// "PSPL" sidecar: u16 version, u32 train count, train indices, u32 test
/// count, test indices.
std::vector<std::uint8_t> encode_splits(const Dataset& dataset);
Dataset decode_dataset(const std::vector<std::uint8_t>& clouds, const std::vector<std::uint8_t>& splits);

/// Sidecar path used by save/load: "<path>.split".
std::filesystem::path split_path(const std::filesystem::path& path);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

struct Batch {
  std::vector<std::uint32_t> indices;  // into Dataset::clouds
  bool remainder = false;              // the trailing short batch
};

/// Seeded Fisher-Yates shuffle of the split, cut into batches of batch_size.
/// The trailing batch, when short, is flagged as a remainder.
std::vector<Batch> batch_iter(const Dataset& dataset, Split split, std::size_t batch_size,
                              std::uint64_t shuffle_seed);

}  // namespace svwa
