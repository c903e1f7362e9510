#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "svwa/error.hpp"
#include "svwa/harness/config.hpp"
#include "svwa/harness/experiment.hpp"
#include "svwa/harness/report.hpp"
#include "svwa/model/checkpoint.hpp"

namespace svwa::harness {
namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("svwa_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Small enough to pretrain in well under a second.
ExperimentConfig tiny_experiment() {
  ExperimentConfig c;
  c.train_per_class = 4;
  c.test_per_class = 3;
  c.num_points = 48;
  c.mlp_channels = {8, 16};
  c.head_dims = {8};
  c.fps_points = 16;
  c.epochs = 2;
  c.pretrain_batch_size = 8;
  c.batch_size = 10;
  c.repeats = 2;
  c.num_variations = {2};
  c.record_timing = false;
  return c;
}

ResultRow make_row(const std::string& method, const std::string& corruption, double acc, std::size_t repeat = 0,
                   std::size_t nv = 1, const std::string& mode = "parallel", const std::string& source = "sampling") {
  ResultRow r;
  r.method = method;
  r.corruption = corruption;
  r.severity = corruption == "clean" ? 0 : 3;
  r.repeat = repeat;
  r.seed = 1000 + repeat;
  r.num_variations = nv;
  r.mode = mode;
  r.variation_source = source;
  r.batch_size = 128;
  r.num_clouds = 400;
  r.accuracy = acc;
  r.entropy_before = 0.1 + acc / 3.0;
  r.entropy_after = 1.0 / 3.0;
  r.adaptable_fraction = 0.003;
  r.overhead_fraction = 0.018;
  r.seconds = 0.25;
  r.fingerprint = "0123456789abcdef";
  return r;
}

TEST(Config, DefaultsValidateAndRoundTrip) {
  const ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  const std::string text = to_text(c);
  EXPECT_EQ(to_text(parse_config(text)), text);
  EXPECT_EQ(c.model_config(8).num_classes, 8u);
}

TEST(Config, EditedValuesRoundTrip) {
  ExperimentConfig c;
  c.lr = 0.1 + 0.2;  // not exactly representable in short decimal form
  c.methods = {"tent", "svwa"};
  c.corruptions = {"clean", "uniform:3"};
  c.num_variations = {2, 6, 12};
  c.head_dims = {};
  c.reset_to_pretrained = true;
  c.seed = 18446744073709551615ull;
  c.dataset = "some dir/data.pcd";
  const ExperimentConfig back = parse_config(to_text(c));
  EXPECT_EQ(back.lr, c.lr);
  EXPECT_EQ(back.methods, c.methods);
  EXPECT_EQ(back.corruptions, c.corruptions);
  EXPECT_EQ(back.num_variations, c.num_variations);
  EXPECT_TRUE(back.head_dims.empty());
  EXPECT_TRUE(back.reset_to_pretrained);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.dataset, c.dataset);
  EXPECT_EQ(to_text(back), to_text(c));
}

TEST(Config, ParsingRules) {
  const auto kv = parse_key_values("# header\n  lr = 0.5   # trailing\n\nrepeats=2\nlr = 0.25\n");
  EXPECT_EQ(kv.at("lr"), "0.25");
  EXPECT_EQ(kv.at("repeats"), "2");
  EXPECT_EQ(kv.size(), 2u);
  EXPECT_THROW(parse_key_values("no equals sign\n"), ConfigError);

  const ExperimentConfig c = parse_config("repeats = 3\nmethods = tent, svwa\n");
  EXPECT_EQ(c.repeats, 3u);
  EXPECT_EQ(c.methods, (std::vector<std::string>{"tent", "svwa"}));
  EXPECT_EQ(c.epochs, ExperimentConfig{}.epochs);
}

TEST(Config, RejectsBadInput) {
  ExperimentConfig c;
  EXPECT_THROW(set_option(c, "learning_rate", "1"), ConfigError);
  EXPECT_THROW(set_option(c, "repeats", "-1"), ConfigError);
  EXPECT_THROW(set_option(c, "repeats", "two"), ConfigError);
  EXPECT_THROW(set_option(c, "lr", "1e-3x"), ConfigError);
  EXPECT_THROW(set_option(c, "reset_to_pretrained", "maybe"), ConfigError);
  EXPECT_THROW(parse_config("methods = shot\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("corruptions = gaussian:9\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("modes = async\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("num_variations = 0\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("lr = 0\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("format = xml\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("fps_points = 2000\n").validate(), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/run.cfg"), IoError);
}

TEST(Config, FileRoundTripAndFingerprint) {
  const auto dir = temp_dir("config");
  ExperimentConfig c;
  c.repeats = 7;
  save_config(c, dir / "run.cfg");
  EXPECT_EQ(to_text(load_config(dir / "run.cfg")), to_text(c));

  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  const std::string fp = fingerprint(c);
  EXPECT_EQ(fp.size(), 16u);
  EXPECT_EQ(fp, fingerprint(load_config(dir / "run.cfg")));
  ExperimentConfig d = c;
  d.out = "elsewhere";
  d.format = "json";
  d.record_timing = false;
  EXPECT_EQ(fingerprint(d), fp);
  d.lr = 2e-3;
  EXPECT_NE(fingerprint(d), fp);
}

TEST(Experiment, ExpandCellsNormalizesNonSvwaMethods) {
  ExperimentConfig c;
  c.methods = {"source-only", "tent", "svwa"};
  c.corruptions = {"gaussian:3", "uniform:3"};
  c.num_variations = {2, 6};
  c.modes = {"parallel", "sequential"};
  const auto cells = expand_cells(c);
  // source-only and tent: 1 cell per corruption; svwa: 2 nv x 2 modes.
  EXPECT_EQ(cells.size(), 2u * (1 + 1 + 4));
  std::set<std::string> fps;
  for (const auto& cell : cells) {
    EXPECT_EQ(cell.methods.size(), 1u);
    EXPECT_EQ(cell.corruptions.size(), 1u);
    EXPECT_EQ(cell.num_variations.size(), 1u);
    if (cell.methods[0] != "svwa") {
      EXPECT_EQ(cell.num_variations[0], 1u);
      EXPECT_EQ(cell.modes[0], "parallel");
    }
    fps.insert(fingerprint(cell));
  }
  EXPECT_EQ(fps.size(), cells.size());
}

TEST(Experiment, BuildStreamIsAPermutedCorruptedTestSplit) {
  const Dataset ds = make_dataset(2, 3, 32, 5);
  const auto clean = build_stream(ds, "clean", 5, 9);
  const auto noisy = build_stream(ds, "gaussian:2", 5, 9);
  ASSERT_EQ(clean.size(), 5u);
  ASSERT_EQ(noisy.size(), 5u);
  std::set<std::uint32_t> ids;
  for (std::size_t b = 0; b < clean.size(); ++b) {
    EXPECT_EQ(clean[b].ids, noisy[b].ids);
    for (std::size_t i = 0; i < clean[b].size(); ++i) {
      const std::uint32_t id = clean[b].ids[i];
      ids.insert(id);
      EXPECT_EQ(clean[b].clouds[i].points, ds.clouds[id].points);
      EXPECT_NE(noisy[b].clouds[i].points, ds.clouds[id].points);
      EXPECT_EQ(noisy[b].clouds[i].label, ds.clouds[id].label);
    }
  }
  EXPECT_EQ(ids, std::set<std::uint32_t>(ds.test_indices.begin(), ds.test_indices.end()));
  const auto again = build_stream(ds, "gaussian:2", 5, 9);
  EXPECT_EQ(again[2].clouds[1].points, noisy[2].clouds[1].points);
  EXPECT_THROW(build_stream(ds, "fog:2", 5, 9), ConfigError);
}

TEST(Experiment, PretrainIsDeterministic) {
  const ExperimentConfig c = tiny_experiment();
  const Dataset ds = make_dataset(c.train_per_class, c.test_per_class, c.num_points, c.data_seed);
  std::size_t calls = 0;
  const PretrainResult a = run_pretrain(ds, c, [&](const EpochLog& log) {
    ++calls;
    EXPECT_EQ(log.epoch, calls);
    EXPECT_TRUE(std::isfinite(log.mean_loss));
  });
  const PretrainResult b = run_pretrain(ds, c);
  EXPECT_EQ(calls, 2u);
  EXPECT_EQ(a.epochs.size(), 2u);
  EXPECT_TRUE(bitwise_equal(a.state.params, b.state.params));
  EXPECT_TRUE(bitwise_equal(a.state.running, b.state.running));
  EXPECT_EQ(a.clean_accuracy, b.clean_accuracy);
  EXPECT_GE(a.clean_accuracy, 0.0);
  EXPECT_LE(a.clean_accuracy, 1.0);
  EXPECT_EQ(encode_checkpoint(a.state), encode_checkpoint(b.state));

  ExperimentConfig none = c;
  none.epochs = 0;
  const PretrainResult init = run_pretrain(ds, none);
  EXPECT_TRUE(init.epochs.empty());
  EXPECT_TRUE(bitwise_equal(init.state.params, ModelState::initialize(c.model_config(8), c.pretrain_seed).params));
}

TEST(Experiment, PretrainReducesLoss) {
  ExperimentConfig c = tiny_experiment();
  c.epochs = 8;
  c.pretrain_lr = 1e-2;
  const Dataset ds = make_dataset(c.train_per_class, c.test_per_class, c.num_points, c.data_seed);
  const PretrainResult r = run_pretrain(ds, c);
  EXPECT_LT(r.epochs.back().mean_loss, r.epochs.front().mean_loss);
}

TEST(Experiment, RunCellRowsAreReproducible) {
  ExperimentConfig c = tiny_experiment();
  const Dataset ds = make_dataset(c.train_per_class, c.test_per_class, c.num_points, c.data_seed);
  const ModelState pre = run_pretrain(ds, c).state;
  c.corruptions = {"gaussian:3"};
  c.methods = {"svwa"};
  const auto cells = expand_cells(c);
  ASSERT_EQ(cells.size(), 1u);
  const auto rows = run_cell(pre, ds, cells[0]);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows, run_cell(pre, ds, cells[0]));
  EXPECT_NE(rows[0].seed, rows[1].seed);
  for (const ResultRow& r : rows) {
    EXPECT_EQ(r.method, "svwa");
    EXPECT_EQ(r.corruption, "gaussian:3");
    EXPECT_EQ(r.severity, 3);
    EXPECT_EQ(r.num_variations, 2u);
    EXPECT_EQ(r.num_clouds, 24u);
    EXPECT_EQ(r.seconds, 0.0);
    EXPECT_EQ(r.fingerprint, fingerprint(cells[0]));
    EXPECT_DOUBLE_EQ(r.overhead_fraction, 2.0 * r.adaptable_fraction);
  }
  ExperimentConfig multi = c;
  multi.methods = {"source-only", "svwa"};
  EXPECT_THROW(run_cell(pre, ds, multi), ConfigError);
}

TEST(Experiment, RunGridCoversEveryCell) {
  ExperimentConfig c = tiny_experiment();
  c.epochs = 1;
  c.repeats = 1;
  c.corruptions = {"clean", "uniform:1"};
  const Dataset ds = make_dataset(c.train_per_class, c.test_per_class, c.num_points, c.data_seed);
  const ModelState pre = run_pretrain(ds, c).state;
  std::size_t cells = 0;
  const auto rows = run_grid(pre, ds, c, [&](const ExperimentConfig&) { ++cells; });
  EXPECT_EQ(cells, 6u);
  EXPECT_EQ(rows.size(), 6u);
}

TEST(Report, CsvAndJsonRoundTripExactly) {
  std::vector<ResultRow> rows{make_row("source-only", "gaussian:3", 0.1 + 0.2),
                              make_row("svwa", "clean", 1.0 / 3.0, 4, 6, "sequential", "jitter+sampling")};
  rows[1].seed = 18446744073709551615ull;
  EXPECT_EQ(rows_from_csv(rows_to_csv(rows)), rows);
  EXPECT_EQ(rows_from_json(rows_to_json(rows)), rows);
  const std::string csv = rows_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("method"), 0u);
  EXPECT_THROW(rows_from_csv("method,bogus\nx,y\n"), FormatError);
  EXPECT_THROW(rows_from_json("{not json"), FormatError);
}

TEST(Report, SummaryMeansAndMissingCells) {
  std::vector<ResultRow> rows{make_row("tent", "gaussian:3", 0.80, 0), make_row("tent", "gaussian:3", 0.90, 1),
                              make_row("tent", "uniform:3", 0.70, 0), make_row("svwa", "gaussian:3", 0.95, 0, 6)};
  const SummaryTable t = summarize(rows);
  EXPECT_EQ(t.corruptions, (std::vector<std::string>{"gaussian:3", "uniform:3"}));
  EXPECT_EQ(t.variants, (std::vector<std::string>{"tent", "svwa/nv=6/parallel/sampling"}));
  EXPECT_NEAR(*t.accuracy[0][0], 85.0, 1e-12);
  EXPECT_NEAR(*t.accuracy[0][1], 70.0, 1e-12);
  EXPECT_NEAR(*t.mean[0], 77.5, 1e-12);
  EXPECT_FALSE(t.accuracy[1][1].has_value());
  EXPECT_FALSE(t.mean[1].has_value());
  const std::string csv = summary_to_csv(t);
  EXPECT_NE(csv.find("tent,85.00,70.00,77.50"), std::string::npos) << csv;

  const std::string sweep = sweep_to_csv(rows);
  EXPECT_NE(sweep.find("tent,1,parallel,sampling,1,gaussian:3,3,2,85,"), std::string::npos) << sweep;
}

TEST(Report, FilterRows) {
  std::vector<ResultRow> rows{make_row("tent", "gaussian:3", 0.8), make_row("svwa", "gaussian:3", 0.9, 0, 6),
                              make_row("tent", "uniform:3", 0.7)};
  EXPECT_EQ(filter_rows(rows, "tent", "").size(), 2u);
  EXPECT_EQ(filter_rows(rows, "", "gaussian:3").size(), 2u);
  EXPECT_EQ(filter_rows(rows, "tent", "uniform:3").size(), 1u);
  EXPECT_EQ(filter_rows(rows, "", "").size(), 3u);
}

TEST(Report, EmitAndLoad) {
  const auto dir = temp_dir("report") / "nested";
  std::vector<ResultRow> rows{make_row("tent", "gaussian:3", 0.8)};
  EXPECT_THROW(emit_report({}, dir, "csv"), ConfigError);
  EXPECT_FALSE(std::filesystem::exists(dir));
  emit_report(rows, dir, "csv");
  EXPECT_TRUE(std::filesystem::exists(dir / "rows.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "sweep.csv"));
  EXPECT_EQ(load_rows(dir), rows);
  const auto jdir = dir.parent_path() / "json";
  emit_report(rows, jdir, "json");
  EXPECT_TRUE(std::filesystem::exists(jdir / "rows.json"));
  EXPECT_EQ(load_rows(jdir), rows);
  EXPECT_THROW(load_rows(dir.parent_path() / "missing"), IoError);
}

TEST(Report, OrderingChecks) {
  std::vector<ResultRow> rows;
  for (std::size_t r = 0; r < 3; ++r) {
    rows.push_back(make_row("source-only", "gaussian:3", 0.70, r));
    rows.push_back(make_row("tent", "gaussian:3", 0.75, r));
    rows.push_back(make_row("svwa", "gaussian:3", 0.78, r, 6));
    rows.push_back(make_row("svwa", "gaussian:3", 0.77, r, 2));
    rows.push_back(make_row("svwa", "gaussian:3", 0.76, r, 6, "parallel", "jitter"));
    rows.push_back(make_row("svwa", "gaussian:3", 0.79, r, 6, "parallel", "flip"));
    rows.push_back(make_row("svwa", "gaussian:3", 0.775, r, 6, "sequential"));
  }
  const auto checks = ordering_checks(rows);
  std::map<std::string, bool> by_name;
  for (const auto& c : checks) by_name[c.name] = c.pass;
  EXPECT_TRUE(by_name.at("gaussian:3: tent >= source-only + 1"));
  EXPECT_TRUE(by_name.at("gaussian:3: svwa/nv=6/parallel/sampling >= tent - 0.5"));
  EXPECT_TRUE(by_name.at("gaussian:3: svwa/nv=6/parallel/sampling >= svwa/nv=2/parallel/sampling - 0.3"));
  EXPECT_TRUE(by_name.at("gaussian:3: svwa/nv=6/parallel/sampling >= svwa/nv=6/parallel/jitter - 0.5"));
  EXPECT_FALSE(by_name.at("gaussian:3: svwa/nv=6/parallel/sampling >= svwa/nv=6/parallel/flip"));
  EXPECT_TRUE(by_name.at("gaussian:3: |svwa/nv=6/parallel/sampling - sequential| <= 1.5"));
  EXPECT_EQ(by_name.count("gaussian:3: svwa/nv=6/parallel/sampling >= svwa/nv=6/parallel/rotation"), 0u);

  std::vector<ResultRow> weak{make_row("source-only", "uniform:3", 0.70), make_row("tent", "uniform:3", 0.705)};
  const auto w = ordering_checks(weak);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_FALSE(w[0].pass);
  EXPECT_NEAR(w[0].lhs, 70.5, 1e-9);
  EXPECT_NEAR(w[0].rhs, 71.0, 1e-9);
}

}  // namespace
}  // namespace svwa::harness
