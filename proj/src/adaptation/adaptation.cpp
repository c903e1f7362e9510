#include "svwa/adaptation/adaptation.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "svwa/corruptions/corruption.hpp"
#include "svwa/error.hpp"
#include "svwa/geometry/sampling.hpp"
#include "svwa/numerics/losses.hpp"
#include "svwa/random.hpp"

namespace svwa {

namespace {

constexpr std::array<std::pair<AdaptMode, std::string_view>, 2> kModes{{
    {AdaptMode::kParallel, "parallel"},
    {AdaptMode::kSequential, "sequential"},
}};

constexpr std::array<std::pair<VariationSource, std::string_view>, 6> kSources{{
    {VariationSource::kSampling, "sampling"},
    {VariationSource::kJitter, "jitter"},
    {VariationSource::kRotation, "rotation"},
    {VariationSource::kFlip, "flip"},
    {VariationSource::kScale, "scale"},
    {VariationSource::kJitterSampling, "jitter+sampling"},
}};

constexpr std::array<std::pair<Method, std::string_view>, 3> kMethods{{
    {Method::kSourceOnly, "source-only"},
    {Method::kTent, "tent"},
    {Method::kSvwa, "svwa"},
}};

template <typename Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<Enum, std::string_view>, N>& table, Enum value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "unknown";
}

template <typename Enum, std::size_t N>
Enum parse_of(const std::array<std::pair<Enum, std::string_view>, N>& table, std::string_view text, const char* what) {
  for (const auto& [v, name] : table) {
    if (name == text) return v;
  }
  std::string options;
  for (const auto& [v, name] : table) options += (options.empty() ? "" : ", ") + std::string(name);
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(text) + "' (expected one of: " + options + ")");
}

std::vector<PointCloud> as_clouds(const std::vector<PatchSet>& sets) {
  std::vector<PointCloud> out(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) out[i].points = sets[i].patches;
  return out;
}

std::optional<double> accuracy_of(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (labels.empty()) return std::nullopt;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace

std::string_view to_string(AdaptMode mode) { return name_of(kModes, mode); }
std::string_view to_string(VariationSource source) { return name_of(kSources, source); }
std::string_view to_string(Method method) { return name_of(kMethods, method); }
AdaptMode parse_adapt_mode(std::string_view text) { return parse_of(kModes, text, "mode"); }
VariationSource parse_variation_source(std::string_view text) { return parse_of(kSources, text, "variation source"); }
Method parse_method(std::string_view text) { return parse_of(kMethods, text, "method"); }

void AdaptConfig::validate() const {
  if (num_variations < 1) throw ConfigError("number of variations must be >= 1");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
}

AdamWState make_adapt_optimizer(const ParamSet& norm_params, double lr) {
  AdamWState hyper;
  hyper.lr = lr;
  return AdamWState::for_params(norm_params, hyper);
}

std::vector<AdaptBranch> make_branches(const ModelState& state, const AdaptConfig& cfg) {
  cfg.validate();
  const ParamSet norm = get_norm_params(state);
  std::vector<AdaptBranch> branches;
  branches.reserve(cfg.num_variations);
  for (std::size_t v = 0; v < cfg.num_variations; ++v) {
    branches.push_back({v, norm, make_adapt_optimizer(norm, cfg.lr)});
  }
  return branches;
}

std::optional<std::vector<int>> StreamBatch::labels() const {
  std::vector<int> out;
  out.reserve(clouds.size());
  for (const PointCloud& c : clouds) {
    if (!c.label) return std::nullopt;
    out.push_back(*c.label);
  }
  return out;
}

std::vector<PatchSet> canonical_sampling(const StreamBatch& batch, std::size_t num_points,
                                         std::uint64_t prediction_seed) {
  if (batch.ids.size() != batch.clouds.size()) throw DimensionError("stream batch: ids and clouds differ in length");
  std::vector<PatchSet> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.push_back(patchify(batch.clouds[i], num_points, 1, mix_seed(prediction_seed, batch.ids[i])));
  }
  return out;
}

TentOutcome tent_adapt(const ModelState& state, ParamSet& norm_params, const Tensor& points, AdamWState& optimizer,
                       std::size_t iterations, bool measure_after) {
  if (iterations < 1) throw ConfigError("tent_adapt: iterations must be >= 1");
  TentOutcome out;
  for (std::size_t it = 0; it < iterations; ++it) {
    LossAndGrads lg = norm_grads(state, points, LossSpec::entropy(), NormMode::kTrainBatchStats, &norm_params);
    if (it == 0) out.entropy_before = lg.loss;
    adamw_step(norm_params, lg.grads, optimizer);
  }
  if (measure_after) {
    ForwardResult fwd = forward_logits(state, points, NormMode::kTrainBatchStats, &norm_params);
    out.entropy_after = softmax_entropy(fwd.logits).mean_entropy;
    out.logits_after = std::move(fwd.logits);
  }
  return out;
}

TentOutcome tent_adapt(ModelState& state, const Tensor& points, AdamWState& optimizer, std::size_t iterations,
                       bool measure_after) {
  ParamSet norm = get_norm_params(state);
  TentOutcome out = tent_adapt(state, norm, points, optimizer, iterations, measure_after);
  set_norm_params(state, norm);
  return out;
}

ParamSet weight_average(std::span<const ParamSet> sets) {
  if (sets.empty()) throw StructureError("weight_average: no parameter sets");
  for (const ParamSet& s : sets.subspan(1)) require_aligned(sets.front(), s, "weight_average");
  const double count = static_cast<double>(sets.size());
  ParamSet out = sets.front().zeros_like();
  std::vector<double> column(sets.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    Tensor& dst = out.entry(p).value;
    for (std::size_t i = 0; i < dst.size(); ++i) {
      for (std::size_t v = 0; v < sets.size(); ++v) column[v] = sets[v].entry(p).value[i];
      std::sort(column.begin(), column.end());
      double delta = 0.0;
      for (double x : column) delta += x - column.front();
      dst[i] = column.front() + delta / count;
    }
  }
  return out;
}

std::vector<Tensor> branch_inputs(const StreamBatch& batch, const AdaptConfig& cfg, std::size_t num_points,
                                  std::size_t batch_index) {
  const std::uint64_t batch_seed = mix_seed(cfg.base_seed, batch_index);
  auto branch_seed = [&](std::size_t v) { return mix_seed(batch_seed, cfg.identical_variations ? 0 : v); };

  std::vector<Tensor> inputs;
  inputs.reserve(cfg.num_variations);
  const VariationSource src = cfg.variation_source;
  if (src == VariationSource::kSampling || src == VariationSource::kJitterSampling) {
    const VariationSet set =
        generate_variations(batch.clouds, cfg.num_variations, num_points, 1, batch_seed,
                            cfg.identical_variations ? VariationSeeds::kForceEqual : VariationSeeds::kDistinct);
    for (std::size_t v = 0; v < cfg.num_variations; ++v) {
      if (src == VariationSource::kSampling) {
        inputs.push_back(stack_points(set.variations[v].clouds));
        continue;
      }
      const std::vector<PointCloud> sampled = as_clouds(set.variations[v].clouds);
      AugmentationSpec jitter{AugmentationKind::kJitter, mix_seed(branch_seed(v), 1)};
      inputs.push_back(stack_points(apply_augmentation(sampled, jitter)));
    }
    return inputs;
  }

  const std::vector<PointCloud> canonical = as_clouds(canonical_sampling(batch, num_points, cfg.prediction_seed));
  AugmentationKind kind = AugmentationKind::kJitter;
  switch (src) {
    case VariationSource::kRotation: kind = AugmentationKind::kRotationZ; break;
    case VariationSource::kFlip: kind = AugmentationKind::kHorizontalFlip; break;
    case VariationSource::kScale: kind = AugmentationKind::kUniformScale; break;
    default: break;
  }
  for (std::size_t v = 0; v < cfg.num_variations; ++v) {
    inputs.push_back(stack_points(apply_augmentation(canonical, {kind, branch_seed(v)})));
  }
  return inputs;
}

BatchRecord svwa_adapt(ModelState& state, const StreamBatch& batch, const AdaptConfig& cfg,
                       std::vector<AdaptBranch>& branches, std::size_t batch_index, const ParamSet* pretrained_norm) {
  cfg.validate();
  if (branches.size() != cfg.num_variations) {
    throw StructureError("svwa_adapt: " + std::to_string(branches.size()) + " branches for " +
                         std::to_string(cfg.num_variations) + " variations");
  }
  if (cfg.reset_to_pretrained && pretrained_norm == nullptr) {
    throw ConfigError("svwa_adapt: reset_to_pretrained needs the pretrained gamma/beta");
  }
  const ParamSet anchor = cfg.reset_to_pretrained ? *pretrained_norm : get_norm_params(state);
  for (const AdaptBranch& b : branches) require_aligned(anchor, b.norm_params, "svwa_adapt branch");

  const std::size_t m = state.config.fps_points;
  const Tensor canonical = stack_points(canonical_sampling(batch, m, cfg.prediction_seed));
  const std::vector<Tensor> inputs = branch_inputs(batch, cfg, m, batch_index);

  BatchRecord record;
  record.batch_index = batch_index;
  record.size = batch.size();
  record.entropy_before =
      softmax_entropy(forward_logits(state, canonical, NormMode::kTrainBatchStats).logits).mean_entropy;

  if (cfg.mode == AdaptMode::kParallel) {
    // Independent given the shared frozen weights; the average is the barrier.
    for (std::size_t v = 0; v < branches.size(); ++v) {
      AdaptBranch& b = branches[v];
      b.norm_params = anchor;
      const TentOutcome t = tent_adapt(state, b.norm_params, inputs[v], b.optimizer, cfg.iterations, false);
      record.branch_entropy.push_back(t.entropy_before);
    }
  } else {
    // One optimizer threaded through the chain; each branch starts where the
    // previous one stopped.
    ParamSet current = anchor;
    AdamWState& shared = branches.front().optimizer;
    for (std::size_t v = 0; v < branches.size(); ++v) {
      const TentOutcome t = tent_adapt(state, current, inputs[v], shared, cfg.iterations, false);
      branches[v].norm_params = current;
      record.branch_entropy.push_back(t.entropy_before);
    }
  }

  std::vector<ParamSet> adapted;
  adapted.reserve(branches.size());
  for (const AdaptBranch& b : branches) adapted.push_back(b.norm_params);
  set_norm_params(state, weight_average(adapted));

  const Tensor logits = forward_logits(state, canonical, NormMode::kTrainBatchStats).logits;
  record.entropy_after = softmax_entropy(logits).mean_entropy;
  record.predictions = argmax_rows(logits);
  if (auto labels = batch.labels()) {
    record.labels = std::move(*labels);
    record.accuracy = accuracy_of(record.predictions, record.labels);
  }
  return record;
}

AdaptReport run_stream(ModelState& state, std::span<const StreamBatch> stream, const AdaptConfig& cfg, Method method) {
  cfg.validate();
  AdaptReport report;
  report.method = method;
  report.adaptable_fraction = adaptable_fraction(state);
  const std::size_t copies = method == Method::kSvwa ? cfg.num_variations : method == Method::kTent ? 1 : 0;
  report.overhead_fraction = static_cast<double>(copies) * report.adaptable_fraction;

  const ParamSet pretrained = get_norm_params(state);
  std::vector<AdaptBranch> branches;
  if (method == Method::kSvwa) branches = make_branches(state, cfg);
  AdamWState tent_optimizer = make_adapt_optimizer(pretrained, cfg.lr);

  const std::size_t m = state.config.fps_points;
  for (std::size_t bi = 0; bi < stream.size(); ++bi) {
    const StreamBatch& batch = stream[bi];
    if (batch.size() < 2) {
      report.skipped_batches += 1;
      report.warnings.push_back("batch " + std::to_string(bi) + " has " + std::to_string(batch.size()) +
                                " cloud(s); skipped (batch statistics need at least 2)");
      continue;
    }
    BatchRecord record;
    if (method == Method::kSvwa) {
      record = svwa_adapt(state, batch, cfg, branches, bi, &pretrained);
    } else {
      record.batch_index = bi;
      record.size = batch.size();
      const Tensor points = stack_points(canonical_sampling(batch, m, cfg.prediction_seed));
      Tensor logits;
      if (method == Method::kSourceOnly) {
        logits = forward_logits(state, points, NormMode::kEvalRunningStats).logits;
        record.entropy_before = record.entropy_after = softmax_entropy(logits).mean_entropy;
      } else {
        if (cfg.reset_to_pretrained) set_norm_params(state, pretrained);
        TentOutcome t = tent_adapt(state, points, tent_optimizer, cfg.iterations, true);
        record.entropy_before = t.entropy_before;
        record.entropy_after = *t.entropy_after;
        logits = std::move(t.logits_after);
      }
      record.predictions = argmax_rows(logits);
      if (auto labels = batch.labels()) {
        record.labels = std::move(*labels);
        record.accuracy = accuracy_of(record.predictions, record.labels);
      }
    }
    report.records.push_back(std::move(record));
  }

  std::size_t labeled = 0, correct = 0, clouds = 0;
  double before = 0.0, after = 0.0;
  for (const BatchRecord& r : report.records) {
    clouds += r.size;
    before += r.entropy_before * static_cast<double>(r.size);
    after += r.entropy_after * static_cast<double>(r.size);
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
      ++labeled;
      correct += r.predictions[i] == r.labels[i] ? 1 : 0;
    }
  }
  if (clouds > 0) {
    report.mean_entropy_before = before / static_cast<double>(clouds);
    report.mean_entropy_after = after / static_cast<double>(clouds);
  }
  if (labeled > 0) report.mean_accuracy = static_cast<double>(correct) / static_cast<double>(labeled);
  return report;
}

}  // namespace svwa
