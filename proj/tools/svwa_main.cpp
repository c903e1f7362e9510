// svwa: command-line driver. Subcommands gen-data, pretrain, adapt, sweep and
// report. Exit codes: 0 ok, 2 config error, 3 I/O or file-format error,
// 4 ordering assertion failed (sweep --assert-ordering).

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svwa/data/dataset.hpp"
#include "svwa/error.hpp"
#include "svwa/harness/config.hpp"
#include "svwa/harness/experiment.hpp"
#include "svwa/harness/report.hpp"
#include "svwa/io/binary.hpp"
#include "svwa/model/checkpoint.hpp"
#include "svwa/runtime.hpp"

namespace fs = std::filesystem;
using namespace svwa;
using namespace svwa::harness;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitAssertion = 4;

/// Flag values collected by CLI11, applied on top of the config file.
struct Overrides {
  std::string config_file;
  std::vector<std::string> sets;                  // --set key=value
  std::map<std::string, std::string> flags;       // config key -> value

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { flags[key] = v; }, help);
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!config_file.empty()) cfg = load_config(config_file);
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      set_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [key, value] : flags) set_option(cfg, key, value);
    cfg.validate();
    return cfg;
  }
};

void common_options(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_file, "key = value config file (flags win)");
  app->add_option("--set", o.sets, "override any config key: --set key=value")->take_all();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

int cmd_gen_data(const ExperimentConfig& cfg) {
  const Dataset ds = make_dataset(cfg.train_per_class, cfg.test_per_class, cfg.num_points, cfg.data_seed);
  if (cfg.dataset.has_parent_path()) fs::create_directories(cfg.dataset.parent_path());
  save_dataset(ds, cfg.dataset);
  save_config(cfg, fs::path(cfg.dataset.string() + ".cfg"));
  std::printf("wrote %s: %zu train / %zu test clouds, %zu points each\n", cfg.dataset.c_str(),
              ds.train_indices.size(), ds.test_indices.size(), cfg.num_points);
  return 0;
}

int cmd_pretrain(const ExperimentConfig& cfg) {
  const Dataset ds = load_dataset(cfg.dataset);
  std::string log;
  const PretrainResult result = run_pretrain(ds, cfg, [&](const EpochLog& e) {
    char line[128];
    std::snprintf(line, sizeof line, "epoch %zu loss %.6f train_accuracy %.4f\n", e.epoch, e.mean_loss,
                  e.train_accuracy);
    log += line;
    std::fputs(line, stdout);
    std::fflush(stdout);
  });
  char line[96];
  std::snprintf(line, sizeof line, "clean_test_accuracy %.6f\n", result.clean_accuracy);
  log += line;
  std::fputs(line, stdout);

  if (cfg.checkpoint.has_parent_path()) fs::create_directories(cfg.checkpoint.parent_path());
  save_checkpoint(result.state, cfg.checkpoint);
  write_text(cfg.checkpoint.string() + ".log", log);
  save_config(cfg, fs::path(cfg.checkpoint.string() + ".cfg"));
  return 0;
}

int cmd_adapt(const ExperimentConfig& cfg, bool assert_ordering) {
  const Dataset ds = load_dataset(cfg.dataset);
  const ModelState pretrained = load_checkpoint(cfg.checkpoint);
  if (pretrained.config.num_classes != ds.num_classes) {
    throw ConfigError("checkpoint has " + std::to_string(pretrained.config.num_classes) +
                      " classes, dataset has " + std::to_string(ds.num_classes));
  }
  fs::create_directories(cfg.out / "configs");
  save_config(cfg, cfg.out / "config.cfg");

  const std::vector<ResultRow> rows = run_grid(pretrained, ds, cfg, [&](const ExperimentConfig& cell) {
    save_config(cell, cfg.out / "configs" / (fingerprint(cell) + ".cfg"));
    std::printf("running %s on %s\n", cell.methods[0].c_str(), cell.corruptions[0].c_str());
    std::fflush(stdout);
  });
  emit_report(rows, cfg.out, cfg.format);
  std::fputs(summary_to_csv(summarize(rows)).c_str(), stdout);

  if (!assert_ordering) return 0;
  bool ok = true;
  for (const OrderingCheck& c : ordering_checks(rows)) {
    std::printf("%s %s (%.2f vs %.2f)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.lhs, c.rhs);
    ok = ok && c.pass;
  }
  return ok ? 0 : kExitAssertion;
}

int cmd_report(const fs::path& in, const fs::path& out, const std::string& method, const std::string& corruption,
               const std::string& format) {
  const std::vector<ResultRow> rows = filter_rows(load_rows(in), method, corruption);
  emit_report(rows, out.empty() ? in : out, format);
  std::fputs(summary_to_csv(summarize(rows)).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Sampling-variation weight averaging for point-cloud test-time adaptation"};
  app.require_subcommand(1);

  Overrides gen_o, pre_o, adapt_o, sweep_o;

  CLI::App* gen = app.add_subcommand("gen-data", "generate the synthetic shape dataset");
  common_options(gen, gen_o);
  gen_o.add(gen, "--out", "dataset", "dataset file to write");
  gen_o.add(gen, "--train-per-class", "train_per_class", "train clouds per class");
  gen_o.add(gen, "--test-per-class", "test_per_class", "test clouds per class");
  gen_o.add(gen, "--points", "num_points", "points per cloud");
  gen_o.add(gen, "--seed", "data_seed", "generation seed");

  CLI::App* pre = app.add_subcommand("pretrain", "train PointNet-lite on the clean train split");
  common_options(pre, pre_o);
  pre_o.add(pre, "--dataset", "dataset", "dataset file");
  pre_o.add(pre, "--out", "checkpoint", "checkpoint file to write");
  pre_o.add(pre, "--epochs", "epochs", "training epochs");
  pre_o.add(pre, "--lr", "pretrain_lr", "AdamW learning rate");
  pre_o.add(pre, "--batch-size", "pretrain_batch_size", "training batch size");
  pre_o.add(pre, "--seed", "pretrain_seed", "initialization / shuffling seed");
  pre_o.add(pre, "--mlp", "mlp_channels", "shared MLP widths, comma separated");
  pre_o.add(pre, "--head", "head_dims", "head widths, comma separated (may be empty)");
  pre_o.add(pre, "--fps-points", "fps_points", "points sampled per cloud");

  auto add_eval_flags = [](CLI::App* cmd, Overrides& o) {
    common_options(cmd, o);
    o.add(cmd, "--dataset", "dataset", "dataset file");
    o.add(cmd, "--checkpoint", "checkpoint", "pretrained checkpoint");
    o.add(cmd, "--method", "methods", "source-only, tent, svwa (comma separated)");
    o.add(cmd, "--corruption", "corruptions", "kind:severity or clean (comma separated)");
    o.add(cmd, "--nv", "num_variations", "number of sampling variations V");
    o.add(cmd, "--iters", "iterations", "adaptation steps per batch");
    o.add(cmd, "--lr", "lr", "adaptation learning rate");
    o.add(cmd, "--batch-size", "batch_size", "test batch size");
    o.add(cmd, "--mode", "modes", "parallel or sequential");
    o.add(cmd, "--variation-source", "variation_sources",
          "sampling, jitter, rotation, flip, scale, jitter+sampling");
    o.add(cmd, "--seed", "seed", "global seed for streams and variations");
    o.add(cmd, "--repeats", "repeats", "number of seeds");
    o.add(cmd, "--out", "out", "output directory");
    o.add(cmd, "--format", "format", "csv or json row file");
  };

  CLI::App* adapt = app.add_subcommand("adapt", "evaluate methods on corrupted test streams");
  add_eval_flags(adapt, adapt_o);

  CLI::App* sweep = app.add_subcommand("sweep", "adapt over a grid of settings (list-valued flags)");
  add_eval_flags(sweep, sweep_o);
  bool assert_ordering = false;
  sweep->add_flag("--assert-ordering", assert_ordering, "exit 4 unless the directional orderings hold");

  CLI::App* report = app.add_subcommand("report", "rebuild summary tables from a run directory");
  fs::path report_in, report_out;
  std::string report_method, report_corruption, report_format = "csv";
  report->add_option("--in", report_in, "run directory holding rows.csv or rows.json")->required();
  report->add_option("--out", report_out, "output directory (default: --in)");
  report->add_option("--method", report_method, "keep only this method");
  report->add_option("--corruption", report_corruption, "keep only this corruption");
  report->add_option("--format", report_format, "csv or json row file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_o.resolve());
    if (pre->parsed()) return cmd_pretrain(pre_o.resolve());
    if (adapt->parsed()) return cmd_adapt(adapt_o.resolve(), false);
    if (sweep->parsed()) return cmd_adapt(sweep_o.resolve(), assert_ordering);
    if (report->parsed()) return cmd_report(report_in, report_out, report_method, report_corruption, report_format);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kExitIo;
  } catch (const VersionError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
