#include "svwa/numerics/layers.hpp"

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "svwa/error.hpp"

namespace svwa {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::RowVectorXd>;

ConstMatrixMap as_matrix(const Tensor& t) {
  return ConstMatrixMap(t.data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
}

MatrixMap as_matrix(Tensor& t) {
  return MatrixMap(t.data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(what) + " must have rank " + std::to_string(rank) + ", got " +
                         shape_to_string(t.shape()));
  }
}

struct ChannelLayout {
  std::size_t outer;
  std::size_t channels;
  std::size_t inner;
};

ChannelLayout channel_layout(const Tensor& input) {
  if (input.rank() == 2) return {input.dim(0), input.dim(1), 1};
  if (input.rank() == 3) return {input.dim(0), input.dim(1), input.dim(2)};
  throw DimensionError("batchnorm expects B x C or B x C x N input, got " + shape_to_string(input.shape()));
}

void require_channel_vector(const Tensor& t, std::size_t channels, const char* what) {
  if (t.rank() != 1 || t.dim(0) != channels) {
    throw DimensionError(std::string(what) + " must have shape [" + std::to_string(channels) + "], got " +
                         shape_to_string(t.shape()));
  }
}

// Visits every element of channel c for an [outer][C][inner] layout.
template <typename Fn>
void for_channel(const ChannelLayout& l, std::size_t c, Fn&& fn) {
  for (std::size_t o = 0; o < l.outer; ++o) {
    const std::size_t base = (o * l.channels + c) * l.inner;
    for (std::size_t i = 0; i < l.inner; ++i) fn(base + i);
  }
}

BatchNormOutput normalize(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                          const std::vector<double>& mean, BatchNormCache cache) {
  const ChannelLayout l{cache.outer, cache.channels, cache.inner};
  Tensor output(input.shape());
  cache.normalized = Tensor(input.shape());
  const double* x = input.data();
  double* xhat = cache.normalized.data();
  double* y = output.data();
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t c = 0; c < l.channels; ++c) {
      const std::size_t base = (o * l.channels + c) * l.inner;
      const double mu = mean[c];
      const double is = cache.inv_std[c];
      const double g = gamma[c];
      const double b = beta[c];
      for (std::size_t i = 0; i < l.inner; ++i) {
        const double n = (x[base + i] - mu) * is;
        xhat[base + i] = n;
        y[base + i] = g * n + b;
      }
    }
  }
  require_finite(output, "batchnorm output");
  return {std::move(output), std::move(cache)};
}

}  // namespace

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require_rank(input, 2, "linear input");
  require_rank(weight, 2, "linear weight");
  require_rank(bias, 1, "linear bias");
  if (input.dim(1) != weight.dim(0) || bias.dim(0) != weight.dim(1)) {
    throw DimensionError("linear: input " + shape_to_string(input.shape()) + ", weight " +
                         shape_to_string(weight.shape()) + ", bias " + shape_to_string(bias.shape()));
  }
  require_finite(input, "linear input");
  Tensor out({input.dim(0), weight.dim(1)});
  auto o = as_matrix(out);
  o.noalias() = as_matrix(input) * as_matrix(weight);
  o.rowwise() += ConstVectorMap(bias.data(), static_cast<Eigen::Index>(bias.size()));
  require_finite(out, "linear output");
  return out;
}

LinearGrads linear_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_out,
                            bool want_input_grad, bool want_param_grads) {
  require_rank(grad_out, 2, "linear grad_out");
  if (grad_out.dim(0) != input.dim(0) || grad_out.dim(1) != weight.dim(1)) {
    throw DimensionError("linear backward: grad_out " + shape_to_string(grad_out.shape()) +
                         " does not match forward shapes");
  }
  LinearGrads grads;
  const auto g = as_matrix(grad_out);
  if (want_input_grad) {
    grads.input = Tensor(input.shape());
    as_matrix(grads.input).noalias() = g * as_matrix(weight).transpose();
  }
  if (want_param_grads) {
    grads.weight = Tensor(weight.shape());
    as_matrix(grads.weight).noalias() = as_matrix(input).transpose() * g;
    grads.bias = Tensor({weight.dim(1)});
    Eigen::Map<Eigen::RowVectorXd>(grads.bias.data(), static_cast<Eigen::Index>(grads.bias.size())) =
        g.colwise().sum();
  }
  return grads;
}

Tensor linear_backward_input(const Tensor& weight, const Tensor& grad_out) {
  require_rank(grad_out, 2, "linear grad_out");
  if (grad_out.dim(1) != weight.dim(1)) {
    throw DimensionError("linear backward: grad_out " + shape_to_string(grad_out.shape()) + " vs weight " +
                         shape_to_string(weight.shape()));
  }
  Tensor grad({grad_out.dim(0), weight.dim(0)});
  as_matrix(grad).noalias() = as_matrix(grad_out) * as_matrix(weight).transpose();
  return grad;
}

BatchNormOutput batchnorm_train(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                                const BatchNormOptions& options) {
  const ChannelLayout l = channel_layout(input);
  require_channel_vector(gamma, l.channels, "batchnorm gamma");
  require_channel_vector(beta, l.channels, "batchnorm beta");
  require_finite(input, "batchnorm input");
  const std::size_t count = l.outer * l.inner;
  if (count < 2) {
    throw DegenerateBatchError("batchnorm in train mode needs at least 2 samples per channel, got " +
                               std::to_string(count));
  }

  BatchNormCache cache;
  cache.mode = NormMode::kTrainBatchStats;
  cache.shape = input.shape();
  cache.outer = l.outer;
  cache.channels = l.channels;
  cache.inner = l.inner;
  cache.batch_mean.assign(l.channels, 0.0);
  cache.batch_var.assign(l.channels, 0.0);
  cache.inv_std.assign(l.channels, 0.0);

  const double* x = input.data();
  const double inv_count = 1.0 / static_cast<double>(count);
  // Channel-outer loops keep each channel's summation order fixed.
  if (l.inner == 1) {
    for (std::size_t o = 0; o < l.outer; ++o) {
      const double* row = x + o * l.channels;
      for (std::size_t c = 0; c < l.channels; ++c) cache.batch_mean[c] += row[c];
    }
    for (double& m : cache.batch_mean) m *= inv_count;
    for (std::size_t o = 0; o < l.outer; ++o) {
      const double* row = x + o * l.channels;
      for (std::size_t c = 0; c < l.channels; ++c) {
        const double d = row[c] - cache.batch_mean[c];
        cache.batch_var[c] += d * d;
      }
    }
  } else {
    for (std::size_t c = 0; c < l.channels; ++c) {
      double sum = 0.0;
      for_channel(l, c, [&](std::size_t i) { sum += x[i]; });
      cache.batch_mean[c] = sum * inv_count;
      double sq = 0.0;
      for_channel(l, c, [&](std::size_t i) {
        const double d = x[i] - cache.batch_mean[c];
        sq += d * d;
      });
      cache.batch_var[c] = sq;
    }
  }
  for (std::size_t c = 0; c < l.channels; ++c) {
    cache.batch_var[c] *= inv_count;
    const double denom = cache.batch_var[c] + options.eps;
    if (!(denom > 0.0)) throw NumericError("batchnorm: non-positive variance + eps");
    cache.inv_std[c] = 1.0 / std::sqrt(denom);
  }
  const std::vector<double> mean = cache.batch_mean;
  return normalize(input, gamma, beta, mean, std::move(cache));
}

BatchNormOutput batchnorm_eval(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                               const Tensor& running_mean, const Tensor& running_var,
                               const BatchNormOptions& options) {
  const ChannelLayout l = channel_layout(input);
  require_channel_vector(gamma, l.channels, "batchnorm gamma");
  require_channel_vector(beta, l.channels, "batchnorm beta");
  require_channel_vector(running_mean, l.channels, "batchnorm running_mean");
  require_channel_vector(running_var, l.channels, "batchnorm running_var");
  require_finite(input, "batchnorm input");

  BatchNormCache cache;
  cache.mode = NormMode::kEvalRunningStats;
  cache.shape = input.shape();
  cache.outer = l.outer;
  cache.channels = l.channels;
  cache.inner = l.inner;
  cache.inv_std.assign(l.channels, 0.0);
  std::vector<double> mean(l.channels);
  for (std::size_t c = 0; c < l.channels; ++c) {
    const double denom = running_var[c] + options.eps;
    if (!(denom > 0.0)) throw NumericError("batchnorm: non-positive running variance + eps");
    cache.inv_std[c] = 1.0 / std::sqrt(denom);
    mean[c] = running_mean[c];
  }
  return normalize(input, gamma, beta, mean, std::move(cache));
}

void update_running_stats(const BatchNormCache& cache, Tensor& running_mean, Tensor& running_var,
                          const BatchNormOptions& options) {
  if (cache.mode != NormMode::kTrainBatchStats) return;
  require_channel_vector(running_mean, cache.channels, "batchnorm running_mean");
  require_channel_vector(running_var, cache.channels, "batchnorm running_var");
  const double count = static_cast<double>(cache.outer * cache.inner);
  const double unbias = count / (count - 1.0);
  const double m = options.momentum;
  for (std::size_t c = 0; c < cache.channels; ++c) {
    running_mean[c] = (1.0 - m) * running_mean[c] + m * cache.batch_mean[c];
    running_var[c] = (1.0 - m) * running_var[c] + m * cache.batch_var[c] * unbias;
  }
}

BatchNormOutput batchnorm(const Tensor& input, const Tensor& gamma, const Tensor& beta, NormMode mode,
                          Tensor& running_mean, Tensor& running_var, const BatchNormOptions& options) {
  if (mode == NormMode::kEvalRunningStats) {
    return batchnorm_eval(input, gamma, beta, running_mean, running_var, options);
  }
  BatchNormOutput out = batchnorm_train(input, gamma, beta, options);
  update_running_stats(out.cache, running_mean, running_var, options);
  return out;
}

BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const Tensor& gamma, const Tensor& grad_out,
                                  bool want_input_grad) {
  if (grad_out.shape() != cache.shape) {
    throw DimensionError("batchnorm backward: grad_out " + shape_to_string(grad_out.shape()) +
                         " vs forward " + shape_to_string(cache.shape));
  }
  const ChannelLayout l{cache.outer, cache.channels, cache.inner};
  BatchNormGrads grads;
  grads.gamma = Tensor({l.channels});
  grads.beta = Tensor({l.channels});
  const double* dy = grad_out.data();
  const double* xhat = cache.normalized.data();
  double* dg = grads.gamma.data();
  double* db = grads.beta.data();

  if (l.inner == 1) {
    for (std::size_t o = 0; o < l.outer; ++o) {
      const std::size_t base = o * l.channels;
      for (std::size_t c = 0; c < l.channels; ++c) {
        db[c] += dy[base + c];
        dg[c] += dy[base + c] * xhat[base + c];
      }
    }
  } else {
    for (std::size_t c = 0; c < l.channels; ++c) {
      for_channel(l, c, [&](std::size_t i) {
        db[c] += dy[i];
        dg[c] += dy[i] * xhat[i];
      });
    }
  }
  if (!want_input_grad) return grads;

  grads.input = Tensor(cache.shape);
  double* dx = grads.input.data();
  if (cache.mode == NormMode::kEvalRunningStats) {
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t c = 0; c < l.channels; ++c) {
        const std::size_t base = (o * l.channels + c) * l.inner;
        const double scale = gamma[c] * cache.inv_std[c];
        for (std::size_t i = 0; i < l.inner; ++i) dx[base + i] = scale * dy[base + i];
      }
    }
    return grads;
  }

  // dx = gamma * inv_std / m * (m * dy - sum(dy) - xhat * sum(dy * xhat))
  const double m = static_cast<double>(l.outer * l.inner);
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t c = 0; c < l.channels; ++c) {
      const std::size_t base = (o * l.channels + c) * l.inner;
      const double scale = gamma[c] * cache.inv_std[c] / m;
      const double sum_dy = db[c];
      const double sum_dy_xhat = dg[c];
      for (std::size_t i = 0; i < l.inner; ++i) {
        dx[base + i] = scale * (m * dy[base + i] - sum_dy - xhat[base + i] * sum_dy_xhat);
      }
    }
  }
  return grads;
}

Tensor relu(const Tensor& input) {
  require_finite(input, "relu input");
  Tensor out(input.shape());
  const double* x = input.data();
  double* y = out.data();
  for (std::size_t i = 0; i < input.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_out) {
  if (input.shape() != grad_out.shape()) {
    throw DimensionError("relu backward: shape mismatch " + shape_to_string(input.shape()) + " vs " +
                         shape_to_string(grad_out.shape()));
  }
  Tensor out(input.shape());
  const double* x = input.data();
  const double* g = grad_out.data();
  double* d = out.data();
  for (std::size_t i = 0; i < input.size(); ++i) d[i] = x[i] > 0.0 ? g[i] : 0.0;
  return out;
}

namespace {

struct PoolStrides {
  std::size_t batch;
  std::size_t channels;
  std::size_t points;
  std::size_t channel_stride;
  std::size_t point_stride;
};

PoolStrides pool_strides(const Shape& shape, PointLayout layout) {
  if (shape.size() != 3) throw DimensionError("max_pool_points expects a rank-3 tensor, got " + shape_to_string(shape));
  if (layout == PointLayout::kChannelsFirst) {
    return {shape[0], shape[1], shape[2], shape[2], 1};
  }
  return {shape[0], shape[2], shape[1], 1, shape[2]};
}

}  // namespace

MaxPoolOutput max_pool_points(const Tensor& input, PointLayout layout) {
  const PoolStrides s = pool_strides(input.shape(), layout);
  require_finite(input, "max_pool_points input");
  MaxPoolOutput out;
  out.output = Tensor({s.batch, s.channels});
  out.argmax.assign(s.batch * s.channels, 0);
  const double* x = input.data();
  const std::size_t per_batch = s.channels * s.points;
  if (layout == PointLayout::kChannelsLast) {
    // Row sweep over points; strict '>' keeps the smallest index on ties.
    for (std::size_t b = 0; b < s.batch; ++b) {
      const double* base = x + b * per_batch;
      double* best = out.output.data() + b * s.channels;
      std::size_t* arg = out.argmax.data() + b * s.channels;
      for (std::size_t c = 0; c < s.channels; ++c) best[c] = base[c];
      for (std::size_t n = 1; n < s.points; ++n) {
        const double* row = base + n * s.channels;
        for (std::size_t c = 0; c < s.channels; ++c) {
          if (row[c] > best[c]) {
            best[c] = row[c];
            arg[c] = n;
          }
        }
      }
    }
    return out;
  }
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t c = 0; c < s.channels; ++c) {
      const double* base = x + b * per_batch + c * s.channel_stride;
      double best = base[0];
      std::size_t arg = 0;
      for (std::size_t n = 1; n < s.points; ++n) {
        if (base[n * s.point_stride] > best) {
          best = base[n * s.point_stride];
          arg = n;
        }
      }
      out.output.at(b, c) = best;
      out.argmax[b * s.channels + c] = arg;
    }
  }
  return out;
}

Tensor max_pool_points_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                                const Tensor& grad_out, PointLayout layout) {
  const PoolStrides s = pool_strides(input_shape, layout);
  if (grad_out.rank() != 2 || grad_out.dim(0) != s.batch || grad_out.dim(1) != s.channels ||
      argmax.size() != s.batch * s.channels) {
    throw DimensionError("max_pool_points backward: grad_out " + shape_to_string(grad_out.shape()) +
                         " does not match input " + shape_to_string(input_shape));
  }
  Tensor grad(input_shape);
  const std::size_t per_batch = s.channels * s.points;
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t c = 0; c < s.channels; ++c) {
      const std::size_t n = argmax[b * s.channels + c];
      grad[b * per_batch + c * s.channel_stride + n * s.point_stride] += grad_out.at(b, c);
    }
  }
  return grad;
}

}  // namespace svwa
