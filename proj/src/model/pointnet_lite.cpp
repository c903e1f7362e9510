#include "svwa/model/pointnet_lite.hpp"

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "svwa/error.hpp"
#include "svwa/numerics/losses.hpp"
#include "svwa/random.hpp"

namespace svwa {

namespace {

struct LayerNames {
  std::string weight, bias, gamma, beta, running_mean, running_var;
};

LayerNames layer_names(const std::string& prefix) {
  return {prefix + ".linear.weight", prefix + ".linear.bias",      prefix + ".bn.gamma",
          prefix + ".bn.beta",       prefix + ".bn.running_mean", prefix + ".bn.running_var"};
}

std::string mlp_prefix(std::size_t i) { return "mlp" + std::to_string(i + 1); }
std::string head_prefix(std::size_t i) { return "head" + std::to_string(i + 1); }

const char* const kLogitsWeight = "logits.weight";
const char* const kLogitsBias = "logits.bias";

std::size_t mlp_out(const PointNetLiteConfig& c) { return c.mlp_channels.back(); }

const Tensor& norm_tensor(const ModelState& state, const ParamSet* norm_params, const std::string& name) {
  return norm_params ? norm_params->at(name) : state.params.at(name);
}

Tensor linear_init(Rng& rng, Shape shape, std::size_t fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

StageTrace run_stage(const ModelState& state, const ParamSet* norm_params, const std::string& prefix,
                     const Tensor& input, NormMode mode, Tensor& activation) {
  const LayerNames n = layer_names(prefix);
  const Tensor z = linear(input, state.params.at(n.weight), state.params.at(n.bias));
  const Tensor& gamma = norm_tensor(state, norm_params, n.gamma);
  const Tensor& beta = norm_tensor(state, norm_params, n.beta);
  BatchNormOutput bn = mode == NormMode::kTrainBatchStats
                           ? batchnorm_train(z, gamma, beta)
                           : batchnorm_eval(z, gamma, beta, state.running.at(n.running_mean),
                                            state.running.at(n.running_var));
  activation = relu(bn.output);
  return {std::move(bn.cache), std::move(bn.output)};
}

}  // namespace

void PointNetLiteConfig::validate() const {
  if (point_dims < 1) throw ConfigError("point_dims must be >= 1");
  if (mlp_channels.empty()) throw ConfigError("mlp_channels must not be empty");
  for (std::size_t d : mlp_channels) {
    if (d < 1) throw ConfigError("mlp_channels entries must be >= 1");
  }
  for (std::size_t d : head_dims) {
    if (d < 1) throw ConfigError("head_dims entries must be >= 1");
  }
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (fps_points < 1) throw ConfigError("fps_points must be >= 1");
}

ModelState ModelState::initialize(const PointNetLiteConfig& config, std::uint64_t seed) {
  config.validate();
  ModelState state;
  state.config = config;
  Rng rng(seed);
  auto add_stage = [&](const std::string& prefix, std::size_t in, std::size_t out) {
    const LayerNames n = layer_names(prefix);
    state.params.add(n.weight, linear_init(rng, {in, out}, in));
    state.params.add(n.bias, linear_init(rng, {out}, in));
    state.params.add(n.gamma, Tensor({out}, 1.0));
    state.params.add(n.beta, Tensor({out}, 0.0));
    state.running.add(n.running_mean, Tensor({out}, 0.0));
    state.running.add(n.running_var, Tensor({out}, 1.0));
  };
  std::size_t in = config.point_dims;
  for (std::size_t i = 0; i < config.mlp_channels.size(); ++i) {
    add_stage(mlp_prefix(i), in, config.mlp_channels[i]);
    in = config.mlp_channels[i];
  }
  for (std::size_t i = 0; i < config.head_dims.size(); ++i) {
    add_stage(head_prefix(i), in, config.head_dims[i]);
    in = config.head_dims[i];
  }
  state.params.add(kLogitsWeight, linear_init(rng, {in, config.num_classes}, in));
  state.params.add(kLogitsBias, linear_init(rng, {config.num_classes}, in));
  return state;
}

std::vector<std::string> norm_param_names(const PointNetLiteConfig& config) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < config.mlp_channels.size(); ++i) {
    const LayerNames n = layer_names(mlp_prefix(i));
    names.push_back(n.gamma);
    names.push_back(n.beta);
  }
  for (std::size_t i = 0; i < config.head_dims.size(); ++i) {
    const LayerNames n = layer_names(head_prefix(i));
    names.push_back(n.gamma);
    names.push_back(n.beta);
  }
  return names;
}

std::vector<std::string> frozen_param_names(const PointNetLiteConfig& config) {
  std::vector<std::string> names;
  auto add = [&](const std::string& prefix) {
    const LayerNames n = layer_names(prefix);
    names.push_back(n.weight);
    names.push_back(n.bias);
  };
  for (std::size_t i = 0; i < config.mlp_channels.size(); ++i) add(mlp_prefix(i));
  for (std::size_t i = 0; i < config.head_dims.size(); ++i) add(head_prefix(i));
  names.emplace_back(kLogitsWeight);
  names.emplace_back(kLogitsBias);
  return names;
}

Tensor stack_points(std::span<const PatchSet> batch) {
  if (batch.empty()) throw DimensionError("stack_points: empty batch");
  const std::size_t m = batch.front().patches.size();
  Tensor out({batch.size(), m, 3});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch[b].patches.size() != m) throw DimensionError("stack_points: clouds differ in point count");
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t a = 0; a < 3; ++a) out.at(b, i, a) = batch[b].patches[i][a];
    }
  }
  return out;
}

Tensor stack_points(std::span<const PointCloud> batch) {
  if (batch.empty()) throw DimensionError("stack_points: empty batch");
  const std::size_t m = batch.front().size();
  Tensor out({batch.size(), m, 3});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch[b].size() != m) throw DimensionError("stack_points: clouds differ in point count");
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t a = 0; a < 3; ++a) out.at(b, i, a) = batch[b].points[i][a];
    }
  }
  return out;
}

ForwardResult forward_logits(const ModelState& state, const Tensor& points, NormMode mode,
                             const ParamSet* norm_params) {
  const PointNetLiteConfig& cfg = state.config;
  if (points.rank() != 3 || points.dim(1) != cfg.fps_points || points.dim(2) != cfg.point_dims) {
    throw DimensionError("forward_logits: expected B x " + std::to_string(cfg.fps_points) + " x " +
                         std::to_string(cfg.point_dims) + " points, got " + shape_to_string(points.shape()));
  }
  const std::size_t batch = points.dim(0);
  if (mode == NormMode::kTrainBatchStats && batch < 2) {
    throw DegenerateBatchError("forward_logits: train-batch-stats mode needs a batch of at least 2 clouds");
  }

  ForwardResult result;
  ForwardTrace& trace = result.trace;
  trace.mode = mode;
  trace.batch = batch;
  trace.points = cfg.fps_points;
  trace.input = points.reshaped({batch * cfg.fps_points, cfg.point_dims});

  Tensor activation;
  const Tensor* x = &trace.input;
  for (std::size_t i = 0; i < cfg.mlp_channels.size(); ++i) {
    Tensor next;
    trace.mlp.push_back(run_stage(state, norm_params, mlp_prefix(i), *x, mode, next));
    activation = std::move(next);
    x = &activation;
  }

  trace.pool_input_shape = {batch, cfg.fps_points, mlp_out(cfg)};
  MaxPoolOutput pool = max_pool_points(activation.reshaped(trace.pool_input_shape), PointLayout::kChannelsLast);
  trace.pool_argmax = std::move(pool.argmax);
  trace.pooled = std::move(pool.output);

  x = &trace.pooled;
  for (std::size_t i = 0; i < cfg.head_dims.size(); ++i) {
    Tensor next;
    trace.head.push_back(run_stage(state, norm_params, head_prefix(i), *x, mode, next));
    activation = std::move(next);
    x = &activation;
  }
  result.logits = linear(*x, state.params.at(kLogitsWeight), state.params.at(kLogitsBias));
  return result;
}

void absorb_batch_stats(ModelState& state, const ForwardTrace& trace) {
  if (trace.mode != NormMode::kTrainBatchStats) return;
  for (std::size_t i = 0; i < trace.mlp.size(); ++i) {
    const LayerNames n = layer_names(mlp_prefix(i));
    update_running_stats(trace.mlp[i].bn, state.running.at(n.running_mean), state.running.at(n.running_var));
  }
  for (std::size_t i = 0; i < trace.head.size(); ++i) {
    const LayerNames n = layer_names(head_prefix(i));
    update_running_stats(trace.head[i].bn, state.running.at(n.running_mean), state.running.at(n.running_var));
  }
}

GradSet backward(const ModelState& state, const ForwardTrace& trace, const Tensor& grad_logits, GradScope scope,
                 const ParamSet* norm_params) {
  const PointNetLiteConfig& cfg = state.config;
  const bool all = scope == GradScope::kAll;
  if (grad_logits.rank() != 2 || grad_logits.dim(0) != trace.batch || grad_logits.dim(1) != cfg.num_classes) {
    throw DimensionError("backward: grad_logits " + shape_to_string(grad_logits.shape()) + " does not match trace");
  }
  std::map<std::string, Tensor> grads;

  // One linear layer: parameter gradients (kAll only) and the input gradient.
  auto through_linear = [&](const std::string& weight, const std::string& bias, const Tensor& input,
                            const Tensor& g, bool want_input) {
    const Tensor& w = state.params.at(weight);
    if (all) {
      LinearGrads lg = linear_backward(input, w, g, want_input, true);
      grads[weight] = std::move(lg.weight);
      grads[bias] = std::move(lg.bias);
      return std::move(lg.input);
    }
    return want_input ? linear_backward_input(w, g) : Tensor{};
  };
  // ReLU and BN of one stage; returns the gradient w.r.t. the BN input.
  auto through_stage = [&](const std::string& prefix, const StageTrace& st, const Tensor& g, bool want_input) {
    const LayerNames n = layer_names(prefix);
    const Tensor g_bn = relu_backward(st.pre_activation, g);
    BatchNormGrads bg = batchnorm_backward(st.bn, norm_tensor(state, norm_params, n.gamma), g_bn, want_input);
    grads[n.gamma] = std::move(bg.gamma);
    grads[n.beta] = std::move(bg.beta);
    return std::move(bg.input);
  };

  const std::size_t heads = cfg.head_dims.size();
  const Tensor head_input = heads == 0 ? trace.pooled : (all ? relu(trace.head.back().pre_activation) : Tensor{});
  Tensor g = through_linear(kLogitsWeight, kLogitsBias, head_input, grad_logits, true);

  for (std::size_t k = heads; k-- > 0;) {
    const LayerNames n = layer_names(head_prefix(k));
    Tensor g_lin = through_stage(head_prefix(k), trace.head[k], g, true);
    const Tensor input = !all ? Tensor{} : (k == 0 ? trace.pooled : relu(trace.head[k - 1].pre_activation));
    g = through_linear(n.weight, n.bias, input, g_lin, true);
  }

  Tensor g_points = max_pool_points_backward(trace.pool_input_shape, trace.pool_argmax, g, PointLayout::kChannelsLast)
                        .reshaped({trace.batch * trace.points, mlp_out(cfg)});

  for (std::size_t k = cfg.mlp_channels.size(); k-- > 0;) {
    const LayerNames n = layer_names(mlp_prefix(k));
    const bool need_below = k > 0;
    Tensor g_lin = through_stage(mlp_prefix(k), trace.mlp[k], g_points, all || need_below);
    if (!all && !need_below) break;
    const Tensor input = !all ? Tensor{} : (k == 0 ? trace.input : relu(trace.mlp[k - 1].pre_activation));
    g_points = through_linear(n.weight, n.bias, input, g_lin, need_below);
  }

  GradSet out;
  const std::vector<std::string> order = all ? state.params.names() : norm_param_names(cfg);
  for (const std::string& name : order) {
    auto it = grads.find(name);
    if (it == grads.end()) throw StructureError("backward: no gradient produced for '" + name + "'");
    out.add(name, std::move(it->second));
  }
  return out;
}

namespace {

LossAndGrads loss_and_grads(const ModelState& state, const Tensor& points, const LossSpec& loss, NormMode mode,
                            const ParamSet* norm_params, GradScope scope) {
  ForwardResult fwd = forward_logits(state, points, mode, norm_params);
  LossAndGrads out;
  Tensor grad_logits;
  if (loss.kind == LossKind::kEntropy) {
    const EntropyResult e = softmax_entropy(fwd.logits);
    out.loss = e.mean_entropy;
    grad_logits = softmax_entropy_backward(e);
  } else {
    const CrossEntropyResult ce = cross_entropy(fwd.logits, loss.labels);
    out.loss = ce.mean_loss;
    grad_logits = cross_entropy_backward(ce);
  }
  out.grads = backward(state, fwd.trace, grad_logits, scope, norm_params);
  out.logits = std::move(fwd.logits);
  out.trace = std::move(fwd.trace);
  return out;
}

}  // namespace

LossAndGrads norm_grads(const ModelState& state, const Tensor& points, const LossSpec& loss, NormMode mode,
                        const ParamSet* norm_params) {
  return loss_and_grads(state, points, loss, mode, norm_params, GradScope::kNormOnly);
}

LossAndGrads full_grads(const ModelState& state, const Tensor& points, const LossSpec& loss, NormMode mode) {
  return loss_and_grads(state, points, loss, mode, nullptr, GradScope::kAll);
}

ParamSet get_norm_params(const ModelState& state) {
  return state.params.subset(norm_param_names(state.config));
}

void set_norm_params(ModelState& state, const ParamSet& values) {
  const ParamSet current = get_norm_params(state);
  require_aligned(current, values, "set_norm_params");
  for (const auto& e : values) state.params.at(e.name) = e.value;
}

ParamSet get_frozen_params(const ModelState& state) {
  return state.params.subset(frozen_param_names(state.config));
}

ParamCounts count_params(const PointNetLiteConfig& config) {
  ParamCounts counts;
  std::size_t in = config.point_dims;
  auto stage = [&](std::size_t out) {
    counts.total += in * out + out + 2 * out;
    counts.adaptable += 2 * out;
    in = out;
  };
  for (std::size_t c : config.mlp_channels) stage(c);
  for (std::size_t c : config.head_dims) stage(c);
  counts.total += in * config.num_classes + config.num_classes;
  return counts;
}

double adaptable_fraction(const ModelState& state) {
  const std::size_t adaptable = get_norm_params(state).scalar_count();
  return static_cast<double>(adaptable) / static_cast<double>(state.params.scalar_count());
}

ParamCounts reference_pointnet_counts() {
  ParamCounts counts;
  auto dense = [&](std::size_t in, std::size_t out, bool norm) {
    counts.total += in * out + out;
    if (norm) {
      counts.total += 2 * out;
      counts.adaptable += 2 * out;
    }
  };
  auto transform_net = [&](std::size_t k) {
    dense(k, 64, true);
    dense(64, 128, true);
    dense(128, 1024, true);
    dense(1024, 512, true);
    dense(512, 256, true);
    dense(256, k * k, false);
  };
  transform_net(3);
  dense(3, 64, true);
  dense(64, 64, true);
  transform_net(64);
  dense(64, 64, true);
  dense(64, 128, true);
  dense(128, 1024, true);
  dense(1024, 512, true);
  dense(512, 256, true);
  dense(256, 40, false);
  return counts;
}

}  // namespace svwa
