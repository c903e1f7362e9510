#include "svwa/harness/experiment.hpp"

#include <chrono>
#include <set>
#include <tuple>

#include "svwa/corruptions/corruption.hpp"
#include "svwa/error.hpp"
#include "svwa/numerics/adamw.hpp"
#include "svwa/numerics/losses.hpp"
#include "svwa/random.hpp"

namespace svwa::harness {

PretrainResult run_pretrain(const Dataset& dataset, const ExperimentConfig& cfg,
                            const std::function<void(const EpochLog&)>& on_epoch) {
  cfg.validate();
  dataset.validate();
  PretrainResult result{ModelState::initialize(cfg.model_config(dataset.num_classes), cfg.pretrain_seed), {}, 0.0};
  ModelState& state = result.state;

  AdamWState hyper;
  hyper.lr = cfg.pretrain_lr;
  AdamWState opt = AdamWState::for_params(state.params, hyper);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::uint64_t epoch_seed = mix_seed(cfg.pretrain_seed, epoch);
    double loss_sum = 0.0;
    std::size_t seen = 0, correct = 0;
    for (const Batch& batch : batch_iter(dataset, Split::kTrain, cfg.pretrain_batch_size, epoch_seed)) {
      if (batch.indices.size() < 2) continue;
      std::vector<PatchSet> sampled;
      std::vector<int> labels;
      sampled.reserve(batch.indices.size());
      for (std::uint32_t id : batch.indices) {
        const PointCloud& cloud = dataset.clouds[id];
        sampled.push_back(patchify(cloud, cfg.fps_points, 1, mix_seed(epoch_seed, id)));
        labels.push_back(*cloud.label);
      }
      LossAndGrads lg = full_grads(state, stack_points(sampled), LossSpec::cross_entropy(labels),
                                   NormMode::kTrainBatchStats);
      absorb_batch_stats(state, lg.trace);
      adamw_step(state.params, lg.grads, opt);

      const std::vector<int> pred = argmax_rows(lg.logits);
      for (std::size_t i = 0; i < labels.size(); ++i) correct += pred[i] == labels[i] ? 1 : 0;
      loss_sum += lg.loss * static_cast<double>(labels.size());
      seen += labels.size();
    }
    EpochLog log{epoch, seen ? loss_sum / static_cast<double>(seen) : 0.0,
                 seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0};
    result.epochs.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  result.clean_accuracy = clean_accuracy(state, dataset, cfg);
  return result;
}

std::vector<StreamBatch> build_stream(const Dataset& dataset, const std::string& corruption, std::size_t batch_size,
                                      std::uint64_t seed) {
  std::optional<CorruptionSpec> spec;
  if (corruption != "clean") spec = CorruptionSpec::parse(corruption);
  std::vector<StreamBatch> stream;
  for (const Batch& batch : batch_iter(dataset, Split::kTest, batch_size, seed)) {
    StreamBatch sb;
    for (std::uint32_t id : batch.indices) {
      const PointCloud& cloud = dataset.clouds[id];
      if (spec) {
        CorruptionSpec s = *spec;
        s.seed = mix_seed(seed, id);
        sb.clouds.push_back(apply_corruption(cloud, s));
      } else {
        sb.clouds.push_back(cloud);
      }
      sb.ids.push_back(id);
    }
    stream.push_back(std::move(sb));
  }
  return stream;
}

double clean_accuracy(const ModelState& state, const Dataset& dataset, const ExperimentConfig& cfg) {
  ModelState copy = state;
  AdaptConfig adapt;
  adapt.batch_size = cfg.batch_size;
  adapt.prediction_seed = cfg.prediction_seed;
  const std::vector<StreamBatch> stream = build_stream(dataset, "clean", cfg.batch_size, cfg.seed);
  const AdaptReport report = run_stream(copy, stream, adapt, Method::kSourceOnly);
  return report.mean_accuracy.value_or(0.0);
}

std::string ResultRow::variant() const {
  if (method != "svwa") return method;
  return method + "/nv=" + std::to_string(num_variations) + "/" + mode + "/" + variation_source;
}

std::vector<ExperimentConfig> expand_cells(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ExperimentConfig> cells;
  std::set<std::string> seen;
  for (const std::string& method : cfg.methods) {
    const bool svwa = parse_method(method) == Method::kSvwa;
    for (const std::string& corruption : cfg.corruptions) {
      for (std::size_t nv : cfg.num_variations) {
        for (const std::string& mode : cfg.modes) {
          for (const std::string& source : cfg.variation_sources) {
            ExperimentConfig cell = cfg;
            cell.methods = {method};
            cell.corruptions = {corruption};
            cell.num_variations = {svwa ? nv : 1};
            cell.modes = {svwa ? mode : "parallel"};
            cell.variation_sources = {svwa ? source : "sampling"};
            if (seen.insert(to_text(cell)).second) cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  return cells;
}

std::vector<ResultRow> run_cell(const ModelState& pretrained, const Dataset& dataset, const ExperimentConfig& cell) {
  cell.validate();
  if (cell.methods.size() != 1 || cell.corruptions.size() != 1 || cell.num_variations.size() != 1 ||
      cell.modes.size() != 1 || cell.variation_sources.size() != 1) {
    throw ConfigError("run_cell needs a config with exactly one entry per grid list");
  }
  const Method method = parse_method(cell.methods[0]);
  const std::string& corruption = cell.corruptions[0];
  const std::string fp = fingerprint(cell);

  AdaptConfig adapt;
  adapt.num_variations = cell.num_variations[0];
  adapt.iterations = cell.iterations;
  adapt.mode = parse_adapt_mode(cell.modes[0]);
  adapt.lr = cell.lr;
  adapt.batch_size = cell.batch_size;
  adapt.prediction_seed = cell.prediction_seed;
  adapt.variation_source = parse_variation_source(cell.variation_sources[0]);
  adapt.reset_to_pretrained = cell.reset_to_pretrained;

  std::vector<ResultRow> rows;
  for (std::size_t r = 0; r < cell.repeats; ++r) {
    const std::uint64_t seed = mix_seed(cell.seed, r);
    adapt.base_seed = seed;
    const std::vector<StreamBatch> stream = build_stream(dataset, corruption, cell.batch_size, seed);

    ModelState state = pretrained;
    const auto start = std::chrono::steady_clock::now();
    const AdaptReport report = run_stream(state, stream, adapt, method);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    ResultRow row;
    row.method = cell.methods[0];
    row.corruption = corruption;
    row.severity = corruption == "clean" ? 0 : CorruptionSpec::parse(corruption).severity;
    row.repeat = r;
    row.seed = seed;
    row.num_variations = adapt.num_variations;
    row.iterations = adapt.iterations;
    row.mode = cell.modes[0];
    row.variation_source = cell.variation_sources[0];
    row.batch_size = cell.batch_size;
    for (const BatchRecord& rec : report.records) row.num_clouds += rec.size;
    row.skipped_batches = report.skipped_batches;
    row.accuracy = report.mean_accuracy.value_or(0.0);
    row.entropy_before = report.mean_entropy_before;
    row.entropy_after = report.mean_entropy_after;
    row.adaptable_fraction = report.adaptable_fraction;
    row.overhead_fraction = report.overhead_fraction;
    row.seconds = cell.record_timing ? elapsed.count() : 0.0;
    row.fingerprint = fp;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> run_grid(const ModelState& pretrained, const Dataset& dataset, const ExperimentConfig& cfg,
                                const std::function<void(const ExperimentConfig&)>& on_cell) {
  std::vector<ResultRow> rows;
  for (const ExperimentConfig& cell : expand_cells(cfg)) {
    if (on_cell) on_cell(cell);
    std::vector<ResultRow> cell_rows = run_cell(pretrained, dataset, cell);
    rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
  }
  return rows;
}

}  // namespace svwa::harness
