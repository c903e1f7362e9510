#pragma once

#include <cstdint>

#include "svwa/numerics/param_set.hpp"

namespace svwa {

/// Optimizer moments plus hyperparameters. Defaults: lr 1e-3, beta1 0.9,
/// weight decay 0 as used for test-time adaptation; beta2/eps are the usual
/// AdamW defaults.
struct AdamWState {
  std::uint64_t step = 0;
  ParamSet m;
  ParamSet v;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  /// Zero moments shaped like `params`, hyperparameters copied from `hyper`.
  static AdamWState for_params(const ParamSet& params, const AdamWState& hyper);
  static AdamWState for_params(const ParamSet& params) { return for_params(params, AdamWState{}); }

  /// Throws ConfigError on out-of-range hyperparameters.
  void validate() const;
};

/// One AdamW update with bias correction. Decoupled decay is applied first:
/// theta <- theta - lr*wd*theta, then theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
void adamw_step(ParamSet& params, const GradSet& grads, AdamWState& state);

}  // namespace svwa
