#include "svwa/numerics/adamw.hpp"

#include <cmath>

#include "svwa/error.hpp"

namespace svwa {

AdamWState AdamWState::for_params(const ParamSet& params, const AdamWState& hyper) {
  AdamWState state;
  state.lr = hyper.lr;
  state.beta1 = hyper.beta1;
  state.beta2 = hyper.beta2;
  state.eps = hyper.eps;
  state.weight_decay = hyper.weight_decay;
  state.m = params.zeros_like();
  state.v = params.zeros_like();
  state.validate();
  return state;
}

void AdamWState::validate() const {
  if (!(lr > 0.0)) throw ConfigError("AdamW lr must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("AdamW beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("AdamW beta2 must be in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("AdamW eps must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("AdamW weight_decay must be >= 0");
}

void adamw_step(ParamSet& params, const GradSet& grads, AdamWState& state) {
  require_aligned(params, grads, "adamw_step grads");
  require_aligned(params, state.m, "adamw_step first moments");
  require_aligned(params, state.v, "adamw_step second moments");
  state.validate();

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  const double decay = 1.0 - state.lr * state.weight_decay;

  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& theta = params.entry(p).value;
    const Tensor& g = grads.entry(p).value;
    Tensor& m = state.m.entry(p).value;
    Tensor& v = state.v.entry(p).value;
    require_finite(g, "adamw_step gradient");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] *= decay;
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      theta[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
    // Storage precision of the parameter is preserved.
    theta.cast(theta.dtype());
  }
}

}  // namespace svwa
