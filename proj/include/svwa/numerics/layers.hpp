#pragma once

#include <cstddef>
#include <vector>

#include "svwa/numerics/tensor.hpp"

namespace svwa {

// ---------------------------------------------------------------------------
// Linear: out[b, j] = sum_i in[b, i] * weight[i, j] + bias[j]

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

struct LinearGrads {
  Tensor input;   // empty when not requested
  Tensor weight;  // empty when not requested
  Tensor bias;    // empty when not requested
};

LinearGrads linear_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_out,
                            bool want_input_grad = true, bool want_param_grads = true);

/// grad_out * weight^T, for callers that need no parameter gradients.
Tensor linear_backward_input(const Tensor& weight, const Tensor& grad_out);

// ---------------------------------------------------------------------------
// Batch normalization over B x C (channel last) or B x C x N inputs.

enum class NormMode { kTrainBatchStats, kEvalRunningStats };

struct BatchNormOptions {
  double eps = 1e-5;
  double momentum = 0.1;
};

/// Everything backward needs, plus the batch statistics train mode measured.
struct BatchNormCache {
  NormMode mode = NormMode::kTrainBatchStats;
  Shape shape;
  std::size_t outer = 0;
  std::size_t channels = 0;
  std::size_t inner = 0;
  Tensor normalized;             // x_hat, same shape as the input
  std::vector<double> inv_std;   // per channel
  std::vector<double> batch_mean;  // train mode only
  std::vector<double> batch_var;   // biased, train mode only
};

struct BatchNormOutput {
  Tensor output;
  BatchNormCache cache;
};

/// Normalizes with the batch's per-channel mean and biased variance. Does not
/// touch running statistics; see update_running_stats.
BatchNormOutput batchnorm_train(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                                const BatchNormOptions& options = {});

/// Normalizes with externally supplied running statistics.
BatchNormOutput batchnorm_eval(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                               const Tensor& running_mean, const Tensor& running_var,
                               const BatchNormOptions& options = {});

/// running <- (1 - momentum) * running + momentum * batch, with the unbiased
/// batch variance feeding running_var.
void update_running_stats(const BatchNormCache& cache, Tensor& running_mean, Tensor& running_var,
                          const BatchNormOptions& options = {});

/// Mode dispatch; train mode also updates the running statistics in place.
BatchNormOutput batchnorm(const Tensor& input, const Tensor& gamma, const Tensor& beta, NormMode mode,
                          Tensor& running_mean, Tensor& running_var,
                          const BatchNormOptions& options = {});

struct BatchNormGrads {
  Tensor input;  // empty when not requested
  Tensor gamma;
  Tensor beta;
};

BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const Tensor& gamma, const Tensor& grad_out,
                                  bool want_input_grad = true);

// ---------------------------------------------------------------------------

Tensor relu(const Tensor& input);
/// grad_out masked by (input > 0).
Tensor relu_backward(const Tensor& input, const Tensor& grad_out);

// ---------------------------------------------------------------------------
// Symmetric max over the point axis.

enum class PointLayout {
  kChannelsFirst,  // B x C x N
  kChannelsLast,   // B x N x C
};

struct MaxPoolOutput {
  Tensor output;                    // B x C
  std::vector<std::size_t> argmax;  // B*C point indices, smallest index on ties
};

MaxPoolOutput max_pool_points(const Tensor& input, PointLayout layout = PointLayout::kChannelsFirst);

/// Routes grad_out[b, c] to the argmax position; everything else is zero.
Tensor max_pool_points_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                                const Tensor& grad_out, PointLayout layout = PointLayout::kChannelsFirst);

}  // namespace svwa
