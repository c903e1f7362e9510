#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "svwa/adaptation/adaptation.hpp"
#include "svwa/model/pointnet_lite.hpp"

namespace svwa::harness {

/// Everything a run needs. Serialized as flat "key = value" lines; list values
/// are comma separated. Defaults describe the desk-scale setup.
struct ExperimentConfig {
  // data
  std::filesystem::path dataset = "data/shapes.pcd";
  std::size_t train_per_class = 250;
  std::size_t test_per_class = 50;
  std::size_t num_points = 1024;
  std::uint64_t data_seed = 7;

  // model (num_classes comes from the dataset)
  std::vector<std::size_t> mlp_channels{32, 64, 128};
  std::vector<std::size_t> head_dims{64};
  std::size_t fps_points = 256;

  // pretraining
  std::filesystem::path checkpoint = "runs/pretrained.ckpt";
  std::size_t epochs = 30;
  double pretrain_lr = 1e-3;
  std::size_t pretrain_batch_size = 32;
  std::uint64_t pretrain_seed = 11;

  // evaluation grid; "clean" is an accepted corruption
  std::vector<std::string> methods{"source-only", "tent", "svwa"};
  std::vector<std::string> corruptions{"gaussian:3"};
  std::vector<std::size_t> num_variations{6};
  std::vector<std::string> modes{"parallel"};
  std::vector<std::string> variation_sources{"sampling"};
  std::size_t iterations = 1;
  double lr = 1e-3;
  std::size_t batch_size = 128;
  std::uint64_t prediction_seed = 0;
  bool reset_to_pretrained = false;

  // bookkeeping
  std::uint64_t seed = 0;
  std::size_t repeats = 5;
  std::filesystem::path out = "runs/eval";
  std::string format = "csv";
  bool record_timing = true;

  /// Throws ConfigError on out-of-range values or unknown names.
  void validate() const;
  PointNetLiteConfig model_config(std::size_t num_classes) const;
};

/// Sets one field from its textual value. Throws ConfigError on an unknown key
/// or a malformed value.
void set_option(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Parses "key = value" lines; '#' starts a comment. Later keys win.
std::map<std::string, std::string> parse_key_values(std::string_view text);
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Every key, one per line, in a fixed order. parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
/// 16 hex digits of fnv1a64(to_text(cfg)), ignoring the keys that only say
/// where and how results are written (out, format, record_timing).
std::string fingerprint(const ExperimentConfig& cfg);

}  // namespace svwa::harness
