#include "svwa/data/dataset.hpp"

#include <numeric>
#include <set>
#include <string>

#include "svwa/data/shapes.hpp"
#include "svwa/error.hpp"
#include "svwa/io/binary.hpp"
#include "svwa/random.hpp"

namespace svwa {

namespace {

constexpr std::string_view kCloudMagic = "PCD3";
constexpr std::string_view kSplitMagic = "PSPL";

void write_indices(io::ByteWriter& w, const std::vector<std::uint32_t>& idx) {
  w.u32(static_cast<std::uint32_t>(idx.size()));
  for (std::uint32_t i : idx) w.u32(i);
}

std::vector<std::uint32_t> read_indices(io::ByteReader& r) {
  const std::size_t at = r.offset();
  const std::uint32_t n = r.u32();
  if (n > r.remaining() / 4) throw FormatError("index count " + std::to_string(n) + " exceeds file size", at);
  std::vector<std::uint32_t> idx(n);
  for (auto& i : idx) i = r.u32();
  return idx;
}

}  // namespace

void Dataset::validate() const {
  for (const PointCloud& c : clouds) {
    if (!c.label || *c.label < 0 || static_cast<std::size_t>(*c.label) >= num_classes) {
      throw Error("dataset cloud has a missing or out-of-range label");
    }
  }
  std::set<std::uint32_t> seen;
  for (const auto* split : {&train_indices, &test_indices}) {
    for (std::uint32_t i : *split) {
      if (i >= clouds.size()) throw Error("split index " + std::to_string(i) + " out of range");
      if (!seen.insert(i).second) throw Error("split index " + std::to_string(i) + " appears twice");
    }
  }
}

Dataset make_dataset(std::size_t per_class_train, std::size_t per_class_test, std::size_t n_points,
                     std::uint64_t seed, const ShapeOptions& options) {
  if (per_class_train < 1 || per_class_test < 1) throw ConfigError("per-class counts must be >= 1");
  Dataset ds;
  ds.num_classes = kNumShapeClasses;
  ds.seed = seed;
  std::uint64_t serial = 0;
  auto generate = [&](std::size_t per_class, std::vector<std::uint32_t>& split) {
    for (ShapeClass shape : all_shape_classes()) {
      for (std::size_t i = 0; i < per_class; ++i) {
        split.push_back(static_cast<std::uint32_t>(ds.clouds.size()));
        ds.clouds.push_back(generate_shape(shape, n_points, mix_seed(seed, serial++), options));
      }
    }
  };
  generate(per_class_train, ds.train_indices);
  generate(per_class_test, ds.test_indices);
  return ds;
}

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  io::ByteWriter w;
  w.raw(kCloudMagic);
  w.u16(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(ds.num_classes));
  w.u32(static_cast<std::uint32_t>(ds.clouds.size()));
  for (const PointCloud& c : ds.clouds) {
    w.u32(static_cast<std::uint32_t>(c.label.value_or(0)));
    w.u32(static_cast<std::uint32_t>(c.size()));
    for (const Point3& p : c.points) {
      for (double v : p) w.f32(static_cast<float>(v));
    }
  }
  return w.take();
}

std::vector<std::uint8_t> encode_splits(const Dataset& ds) {
  io::ByteWriter w;
  w.raw(kSplitMagic);
  w.u16(kDatasetVersion);
  write_indices(w, ds.train_indices);
  write_indices(w, ds.test_indices);
  return w.take();
}

Dataset decode_dataset(const std::vector<std::uint8_t>& clouds, const std::vector<std::uint8_t>& splits) {
  Dataset ds;
  {
    io::ByteReader r(clouds);
    if (r.raw(4) != kCloudMagic) throw FormatError("not a dataset file (bad magic)", 0);
    const std::uint16_t version = r.u16();
    if (version != kDatasetVersion) {
      throw VersionError("dataset version " + std::to_string(version) + " is not supported");
    }
    ds.num_classes = r.u32();
    const std::size_t count_at = r.offset();
    const std::uint32_t count = r.u32();
    if (count > r.remaining() / 8) throw FormatError("cloud count " + std::to_string(count) + " exceeds file size", count_at);
    ds.clouds.resize(count);
    for (PointCloud& c : ds.clouds) {
      const std::size_t label_at = r.offset();
      const std::uint32_t label = r.u32();
      if (label >= ds.num_classes) throw FormatError("label " + std::to_string(label) + " out of range", label_at);
      c.label = static_cast<int>(label);
      const std::size_t n_at = r.offset();
      const std::uint32_t n = r.u32();
      if (n == 0 || n > r.remaining() / 12) {
        throw FormatError("point count " + std::to_string(n) + " invalid for remaining file size", n_at);
      }
      c.points.resize(n);
      for (Point3& p : c.points) {
        for (double& v : p) v = r.f32();
      }
    }
    r.expect_end("dataset");
  }
  {
    io::ByteReader r(splits);
    if (r.raw(4) != kSplitMagic) throw FormatError("not a split file (bad magic)", 0);
    const std::uint16_t version = r.u16();
    if (version != kDatasetVersion) throw VersionError("split version " + std::to_string(version) + " is not supported");
    ds.train_indices = read_indices(r);
    ds.test_indices = read_indices(r);
    r.expect_end("split file");
  }
  try {
    ds.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("inconsistent dataset: ") + e.what(), 0);
  }
  return ds;
}

std::filesystem::path split_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".split";
  return p;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  io::write_file(path, encode_dataset(dataset));
  io::write_file(split_path(path), encode_splits(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return decode_dataset(io::read_file(path), io::read_file(split_path(path)));
}

std::vector<Batch> batch_iter(const Dataset& dataset, Split split, std::size_t batch_size,
                              std::uint64_t shuffle_seed) {
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  std::vector<std::uint32_t> order = dataset.indices(split);
  Rng rng(shuffle_seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    b.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
    b.remainder = end - start < batch_size;
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace svwa
