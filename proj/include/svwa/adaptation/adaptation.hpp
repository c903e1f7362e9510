#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svwa/geometry/point_cloud.hpp"
#include "svwa/model/pointnet_lite.hpp"
#include "svwa/numerics/adamw.hpp"

namespace svwa {

enum class AdaptMode { kParallel, kSequential };

/// Where the V per-branch inputs come from.
enum class VariationSource { kSampling, kJitter, kRotation, kFlip, kScale, kJitterSampling };

enum class Method { kSourceOnly, kTent, kSvwa };

std::string_view to_string(AdaptMode mode);
std::string_view to_string(VariationSource source);
std::string_view to_string(Method method);
AdaptMode parse_adapt_mode(std::string_view text);
VariationSource parse_variation_source(std::string_view text);
Method parse_method(std::string_view text);

struct AdaptConfig {
  std::size_t num_variations = 6;
  std::size_t iterations = 1;
  AdaptMode mode = AdaptMode::kParallel;
  double lr = 1e-3;
  std::size_t batch_size = 128;
  std::uint64_t base_seed = 0;
  /// Seeds the canonical sampling every method predicts on.
  std::uint64_t prediction_seed = 0;
  VariationSource variation_source = VariationSource::kSampling;
  /// Start each batch's branches from the pretrained gamma/beta instead of the
  /// current averaged ones.
  bool reset_to_pretrained = false;
  /// Test hook: every branch receives the same variation.
  bool identical_variations = false;

  void validate() const;
};

/// One member of the weight-average normalization layer: a private gamma/beta
/// set and its optimizer, sharing every frozen weight with the model.
struct AdaptBranch {
  std::size_t index = 0;
  ParamSet norm_params;
  AdamWState optimizer;
};

std::vector<AdaptBranch> make_branches(const ModelState& state, const AdaptConfig& cfg);

/// AdamW as used at test time: the configured lr, everything else default.
AdamWState make_adapt_optimizer(const ParamSet& norm_params, double lr);

/// A batch of test clouds with stable ids (their dataset indices).
struct StreamBatch {
  std::vector<PointCloud> clouds;
  std::vector<std::uint32_t> ids;

  std::size_t size() const noexcept { return clouds.size(); }
  /// Labels of every cloud, or nullopt if any cloud is unlabeled.
  std::optional<std::vector<int>> labels() const;
};

/// Canonical FPS sampling of every cloud: seed mix_seed(prediction_seed, id).
/// Independent of how the stream is batched or ordered.
std::vector<PatchSet> canonical_sampling(const StreamBatch& batch, std::size_t num_points,
                                         std::uint64_t prediction_seed);

struct TentOutcome {
  double entropy_before = 0.0;
  std::optional<double> entropy_after;  // only when measured
  Tensor logits_after;                  // only when measured
};

/// `iterations` rounds of: train-batch-stats forward, mean entropy, gamma/beta
/// gradients, one AdamW step on `norm_params`. Frozen weights are read only.
TentOutcome tent_adapt(const ModelState& state, ParamSet& norm_params, const Tensor& points, AdamWState& optimizer,
                       std::size_t iterations, bool measure_after = true);

/// Adapts the model's own gamma/beta.
TentOutcome tent_adapt(ModelState& state, const Tensor& points, AdamWState& optimizer, std::size_t iterations,
                       bool measure_after = true);

/// Elementwise mean with divisor V. Per coordinate the values are sorted and
/// averaged as min + sum(x - min) / V, so the result does not depend on the
/// order of the inputs and V copies of one set average to that set exactly.
ParamSet weight_average(std::span<const ParamSet> sets);

struct BatchRecord {
  std::size_t batch_index = 0;
  std::size_t size = 0;
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  std::vector<int> predictions;
  std::vector<int> labels;
  std::optional<double> accuracy;
  std::vector<double> branch_entropy;  // svwa only: entropy each branch adapted on
};

/// The V branch inputs for one batch, as B x M x 3 tensors.
std::vector<Tensor> branch_inputs(const StreamBatch& batch, const AdaptConfig& cfg, std::size_t num_points,
                                  std::size_t batch_index);

/// Sampling variation + weight averaging for one batch. Branches persist
/// across batches (their optimizer moments carry over); their gamma/beta are
/// reset at the start of every batch. `pretrained_norm` is required when
/// cfg.reset_to_pretrained is set.
BatchRecord svwa_adapt(ModelState& state, const StreamBatch& batch, const AdaptConfig& cfg,
                       std::vector<AdaptBranch>& branches, std::size_t batch_index,
                       const ParamSet* pretrained_norm = nullptr);

struct AdaptReport {
  Method method = Method::kSourceOnly;
  std::vector<BatchRecord> records;
  std::optional<double> mean_accuracy;  // over every labeled, evaluated cloud
  double mean_entropy_before = 0.0;
  double mean_entropy_after = 0.0;
  double adaptable_fraction = 0.0;
  double overhead_fraction = 0.0;  // branches * adaptable_fraction
  std::size_t skipped_batches = 0;
  std::vector<std::string> warnings;
};

/// Online evaluation over a stream. source-only: eval-mode forward, no
/// updates. tent/svwa: continual adaptation, state carried across batches.
/// Batches of fewer than 2 clouds are skipped with a warning.
AdaptReport run_stream(ModelState& state, std::span<const StreamBatch> stream, const AdaptConfig& cfg, Method method);

}  // namespace svwa
