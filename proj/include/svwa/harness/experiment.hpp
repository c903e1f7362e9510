#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "svwa/adaptation/adaptation.hpp"
#include "svwa/data/dataset.hpp"
#include "svwa/harness/config.hpp"
#include "svwa/model/pointnet_lite.hpp"

namespace svwa::harness {

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
};

struct PretrainResult {
  ModelState state;
  std::vector<EpochLog> epochs;
  double clean_accuracy = 0.0;  // source-only on the clean test split
};

/// Supervised cross-entropy training with AdamW at a constant lr. Each epoch
/// reshuffles the train split and redraws every cloud's FPS start; BN runs on
/// batch statistics and folds them into the running averages. Deterministic in
/// cfg.pretrain_seed. epochs = 0 returns the initialization.
PretrainResult run_pretrain(const Dataset& dataset, const ExperimentConfig& cfg,
                            const std::function<void(const EpochLog&)>& on_epoch = {});

/// The test split in the order batch_iter(seed) gives, each cloud corrupted
/// with seed mix_seed(seed, cloud index). corruption is "clean" or "kind:s".
std::vector<StreamBatch> build_stream(const Dataset& dataset, const std::string& corruption, std::size_t batch_size,
                                      std::uint64_t seed);

/// Source-only accuracy on the clean test split.
double clean_accuracy(const ModelState& state, const Dataset& dataset, const ExperimentConfig& cfg);

struct ResultRow {
  std::string method;
  std::string corruption;  // "clean" or "kind:s"
  int severity = 0;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;  // the repeat's stream/adaptation seed
  std::size_t num_variations = 1;
  std::size_t iterations = 1;
  std::string mode;
  std::string variation_source;
  std::size_t batch_size = 0;
  std::size_t num_clouds = 0;
  std::size_t skipped_batches = 0;
  double accuracy = 0.0;
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  double adaptable_fraction = 0.0;
  double overhead_fraction = 0.0;
  double seconds = 0.0;
  std::string fingerprint;  // of the cell config that produced the row

  /// Method plus the settings that distinguish svwa cells, e.g.
  /// "svwa/nv=6/parallel/sampling". Plain method name otherwise.
  std::string variant() const;
  bool operator==(const ResultRow&) const = default;
};

/// One config per distinct (method, corruption, V, mode, source) cell, every
/// list field narrowed to a single entry. Settings that only matter to svwa
/// are normalized for the other methods so they collapse to one cell.
std::vector<ExperimentConfig> expand_cells(const ExperimentConfig& cfg);

/// cell.repeats rows; repeat r uses seed mix_seed(cell.seed, r).
std::vector<ResultRow> run_cell(const ModelState& pretrained, const Dataset& dataset, const ExperimentConfig& cell);

std::vector<ResultRow> run_grid(const ModelState& pretrained, const Dataset& dataset, const ExperimentConfig& cfg,
                                const std::function<void(const ExperimentConfig&)>& on_cell = {});

}  // namespace svwa::harness
