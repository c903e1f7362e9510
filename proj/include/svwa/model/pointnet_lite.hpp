#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svwa/geometry/point_cloud.hpp"
#include "svwa/geometry/sampling.hpp"
#include "svwa/numerics/layers.hpp"
#include "svwa/numerics/param_set.hpp"

namespace svwa {

/// Shared per-point MLP (linear -> BN -> ReLU per stage), max pool over points,
/// head (linear -> BN -> ReLU per hidden dim), final linear to logits.
struct PointNetLiteConfig {
  std::size_t point_dims = 3;
  std::vector<std::size_t> mlp_channels{64, 64, 128, 1024};
  std::vector<std::size_t> head_dims{512, 256};
  std::size_t num_classes = 8;
  std::size_t fps_points = 1024;

  void validate() const;
  bool operator==(const PointNetLiteConfig&) const = default;
};

/// Model parameters, BN running statistics and the architecture they belong to.
struct ModelState {
  PointNetLiteConfig config;
  ParamSet params;   // definition order
  ParamSet running;  // "<layer>.bn.running_mean" / "<layer>.bn.running_var"

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) linear weights and biases,
  /// gamma = 1, beta = 0, running mean 0 and variance 1.
  static ModelState initialize(const PointNetLiteConfig& config, std::uint64_t seed);
};

/// Names of every BN gamma/beta, in definition order.
std::vector<std::string> norm_param_names(const PointNetLiteConfig& config);
/// Names of every other parameter, in definition order.
std::vector<std::string> frozen_param_names(const PointNetLiteConfig& config);

// ---------------------------------------------------------------------------

struct StageTrace {
  BatchNormCache bn;
  Tensor pre_activation;  // BN output, before ReLU
};

/// Activations kept by forward_logits so backward needs no second forward.
struct ForwardTrace {
  NormMode mode = NormMode::kTrainBatchStats;
  std::size_t batch = 0;
  std::size_t points = 0;
  Tensor input;  // (B*M) x point_dims
  std::vector<StageTrace> mlp;
  std::vector<StageTrace> head;
  Shape pool_input_shape;  // B x M x C, channels last
  std::vector<std::size_t> pool_argmax;
  Tensor pooled;  // B x C
};

struct ForwardResult {
  Tensor logits;  // B x num_classes
  ForwardTrace trace;
};

/// Stacks the centers (the K = 1 patches) of every cloud into B x M x 3.
Tensor stack_points(std::span<const PatchSet> batch);
/// Stacks equally sized clouds into B x M x 3.
Tensor stack_points(std::span<const PointCloud> batch);

/// `norm_params`, when given, replaces the model's gamma/beta (it must hold
/// every name in norm_param_names). Running statistics are never modified.
ForwardResult forward_logits(const ModelState& state, const Tensor& points, NormMode mode,
                             const ParamSet* norm_params = nullptr);

/// Folds the batch statistics recorded in a train-mode trace into the running
/// statistics.
void absorb_batch_stats(ModelState& state, const ForwardTrace& trace);

enum class GradScope {
  kNormOnly,  // gamma/beta only; frozen-weight gradients are never formed
  kAll,
};

/// Backpropagates d(loss)/d(logits) through the network. The result is in
/// definition order: the gamma/beta subset for kNormOnly, every parameter
/// for kAll.
GradSet backward(const ModelState& state, const ForwardTrace& trace, const Tensor& grad_logits, GradScope scope,
                 const ParamSet* norm_params = nullptr);

enum class LossKind { kEntropy, kCrossEntropy };

struct LossSpec {
  LossKind kind = LossKind::kEntropy;
  std::vector<int> labels;  // cross-entropy only

  static LossSpec entropy() { return {}; }
  static LossSpec cross_entropy(std::vector<int> labels) { return {LossKind::kCrossEntropy, std::move(labels)}; }
};

struct LossAndGrads {
  double loss = 0.0;
  GradSet grads;
  Tensor logits;
  ForwardTrace trace;
};

/// One forward and one backward; grads cover gamma/beta only.
LossAndGrads norm_grads(const ModelState& state, const Tensor& points, const LossSpec& loss, NormMode mode,
                        const ParamSet* norm_params = nullptr);

/// As norm_grads, with gradients for every parameter.
LossAndGrads full_grads(const ModelState& state, const Tensor& points, const LossSpec& loss, NormMode mode);

// ---------------------------------------------------------------------------

/// Deep copy of the gamma/beta partition.
ParamSet get_norm_params(const ModelState& state);
/// Overwrites exactly the gamma/beta partition; StructureError if misaligned.
void set_norm_params(ModelState& state, const ParamSet& values);
/// Deep copy of every non-gamma/beta parameter.
ParamSet get_frozen_params(const ModelState& state);

struct ParamCounts {
  std::size_t total = 0;
  std::size_t adaptable = 0;

  double adaptable_fraction() const { return static_cast<double>(adaptable) / static_cast<double>(total); }
};

/// Counted symbolically from the layer dimensions.
ParamCounts count_params(const PointNetLiteConfig& config);

double adaptable_fraction(const ModelState& state);

/// Classic PointNet classifier (input and feature transform networks, shared
/// MLP 64-64-64-128-1024, head 512-256-40, BN after every layer but the
/// transform regressions and logits).
ParamCounts reference_pointnet_counts();

}  // namespace svwa
