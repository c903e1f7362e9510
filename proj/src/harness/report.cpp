#include "svwa/harness/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "svwa/error.hpp"
#include "svwa/io/binary.hpp"

namespace svwa::harness {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& text, const std::string& column) {
  T out{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("row column " + column + ": cannot parse '" + text + "'", 0);
  }
  return out;
}

struct Column {
  std::string name;
  std::function<std::string(const ResultRow&)> get;
  std::function<void(ResultRow&, const std::string&)> set;
};

#define SVWA_STR_COL(f) \
  Column { #f, [](const ResultRow& r) { return r.f; }, [](ResultRow& r, const std::string& v) { r.f = v; } }
#define SVWA_NUM_COL(f)                                                            \
  Column {                                                                         \
    #f, [](const ResultRow& r) { return std::to_string(r.f); },                    \
        [](ResultRow& r, const std::string& v) { r.f = parse_number<decltype(r.f)>(v, #f); } \
  }
#define SVWA_REAL_COL(f)                                                                        \
  Column {                                                                                      \
    #f, [](const ResultRow& r) { return fmt_double(r.f); },                                     \
        [](ResultRow& r, const std::string& v) { r.f = parse_number<double>(v, #f); }           \
  }

const std::vector<Column>& columns() {
  static const std::vector<Column> table{
      SVWA_STR_COL(method),          SVWA_STR_COL(corruption),        SVWA_NUM_COL(severity),
      SVWA_NUM_COL(repeat),          SVWA_NUM_COL(seed),              SVWA_NUM_COL(num_variations),
      SVWA_NUM_COL(iterations),      SVWA_STR_COL(mode),              SVWA_STR_COL(variation_source),
      SVWA_NUM_COL(batch_size),      SVWA_NUM_COL(num_clouds),        SVWA_NUM_COL(skipped_batches),
      SVWA_REAL_COL(accuracy),       SVWA_REAL_COL(entropy_before),   SVWA_REAL_COL(entropy_after),
      SVWA_REAL_COL(adaptable_fraction), SVWA_REAL_COL(overhead_fraction), SVWA_REAL_COL(seconds),
      SVWA_STR_COL(fingerprint),
  };
  return table;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = io::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

/// Seed-mean accuracy in percent per (variant, corruption), first-seen order.
struct Means {
  std::vector<std::string> variants, corruptions;
  std::map<std::pair<std::string, std::string>, std::vector<double>> values;

  explicit Means(const std::vector<ResultRow>& rows) {
    for (const ResultRow& r : rows) {
      const std::string v = r.variant();
      if (std::find(variants.begin(), variants.end(), v) == variants.end()) variants.push_back(v);
      if (std::find(corruptions.begin(), corruptions.end(), r.corruption) == corruptions.end()) {
        corruptions.push_back(r.corruption);
      }
      values[{v, r.corruption}].push_back(100.0 * r.accuracy);
    }
  }

  std::optional<double> mean(const std::string& variant, const std::string& corruption) const {
    const auto it = values.find({variant, corruption});
    if (it == values.end()) return std::nullopt;
    double s = 0.0;
    for (double x : it->second) s += x;
    return s / static_cast<double>(it->second.size());
  }
};

}  // namespace

const std::vector<std::string>& row_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const Column& c : columns()) n.push_back(c.name);
    return n;
  }();
  return names;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::string out;
  for (std::size_t i = 0; i < columns().size(); ++i) out += (i ? "," : "") + columns()[i].name;
  out += "\n";
  for (const ResultRow& r : rows) {
    for (std::size_t i = 0; i < columns().size(); ++i) out += (i ? "," : "") + columns()[i].get(r);
    out += "\n";
  }
  return out;
}

std::vector<ResultRow> rows_from_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw FormatError("rows csv: missing header", 0);
  const std::vector<std::string> header = split_csv_line(line);
  std::vector<const Column*> order;
  for (const std::string& name : header) {
    const Column* found = nullptr;
    for (const Column& c : columns()) {
      if (c.name == name) found = &c;
    }
    if (!found) throw FormatError("rows csv: unknown column '" + name + "'", 0);
    order.push_back(found);
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(ss, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != order.size()) {
      throw FormatError("rows csv line " + std::to_string(line_no) + ": expected " + std::to_string(order.size()) +
                            " fields, got " + std::to_string(fields.size()),
                        0);
    }
    ResultRow row;
    for (std::size_t i = 0; i < fields.size(); ++i) order[i]->set(row, fields[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string rows_to_json(const std::vector<ResultRow>& rows) {
  json arr = json::array();
  for (const ResultRow& r : rows) {
    arr.push_back({{"method", r.method},
                   {"corruption", r.corruption},
                   {"severity", r.severity},
                   {"repeat", r.repeat},
                   {"seed", r.seed},
                   {"num_variations", r.num_variations},
                   {"iterations", r.iterations},
                   {"mode", r.mode},
                   {"variation_source", r.variation_source},
                   {"batch_size", r.batch_size},
                   {"num_clouds", r.num_clouds},
                   {"skipped_batches", r.skipped_batches},
                   {"accuracy", r.accuracy},
                   {"entropy_before", r.entropy_before},
                   {"entropy_after", r.entropy_after},
                   {"adaptable_fraction", r.adaptable_fraction},
                   {"overhead_fraction", r.overhead_fraction},
                   {"seconds", r.seconds},
                   {"fingerprint", r.fingerprint}});
  }
  return arr.dump(2) + "\n";
}

std::vector<ResultRow> rows_from_json(const std::string& text) {
  std::vector<ResultRow> rows;
  try {
    for (const json& j : json::parse(text)) {
      ResultRow r;
      j.at("method").get_to(r.method);
      j.at("corruption").get_to(r.corruption);
      j.at("severity").get_to(r.severity);
      j.at("repeat").get_to(r.repeat);
      j.at("seed").get_to(r.seed);
      j.at("num_variations").get_to(r.num_variations);
      j.at("iterations").get_to(r.iterations);
      j.at("mode").get_to(r.mode);
      j.at("variation_source").get_to(r.variation_source);
      j.at("batch_size").get_to(r.batch_size);
      j.at("num_clouds").get_to(r.num_clouds);
      j.at("skipped_batches").get_to(r.skipped_batches);
      j.at("accuracy").get_to(r.accuracy);
      j.at("entropy_before").get_to(r.entropy_before);
      j.at("entropy_after").get_to(r.entropy_after);
      j.at("adaptable_fraction").get_to(r.adaptable_fraction);
      j.at("overhead_fraction").get_to(r.overhead_fraction);
      j.at("seconds").get_to(r.seconds);
      j.at("fingerprint").get_to(r.fingerprint);
      rows.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("rows json: ") + e.what(), 0);
  }
  return rows;
}

std::vector<ResultRow> filter_rows(const std::vector<ResultRow>& rows, const std::string& method,
                                   const std::string& corruption) {
  std::vector<ResultRow> out;
  for (const ResultRow& r : rows) {
    if ((method.empty() || r.method == method) && (corruption.empty() || r.corruption == corruption)) {
      out.push_back(r);
    }
  }
  return out;
}

SummaryTable summarize(const std::vector<ResultRow>& rows) {
  const Means means(rows);
  SummaryTable t;
  t.corruptions = means.corruptions;
  t.variants = means.variants;
  for (const std::string& v : t.variants) {
    std::vector<std::optional<double>> row;
    double sum = 0.0;
    bool complete = true;
    for (const std::string& c : t.corruptions) {
      row.push_back(means.mean(v, c));
      if (row.back()) {
        sum += *row.back();
      } else {
        complete = false;
      }
    }
    t.accuracy.push_back(row);
    t.mean.push_back(complete ? std::optional<double>(sum / static_cast<double>(t.corruptions.size()))
                              : std::nullopt);
  }
  return t;
}

std::string summary_to_csv(const SummaryTable& table) {
  std::string out = "method";
  for (const std::string& c : table.corruptions) out += "," + c;
  out += ",Mean\n";
  for (std::size_t v = 0; v < table.variants.size(); ++v) {
    out += table.variants[v];
    for (const auto& cell : table.accuracy[v]) out += "," + (cell ? fmt_fixed(*cell) : std::string());
    out += "," + (table.mean[v] ? fmt_fixed(*table.mean[v]) : std::string()) + "\n";
  }
  return out;
}

std::string sweep_to_csv(const std::vector<ResultRow>& rows) {
  std::string out =
      "method,num_variations,mode,variation_source,iterations,corruption,severity,seeds,mean_accuracy,std_accuracy\n";
  std::vector<std::string> keys;
  std::map<std::string, std::vector<const ResultRow*>> groups;
  for (const ResultRow& r : rows) {
    const std::string key = r.variant() + "|" + r.corruption + "|" + std::to_string(r.iterations);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&r);
  }
  for (const std::string& key : keys) {
    const auto& g = groups[key];
    double mean = 0.0;
    for (const ResultRow* r : g) mean += 100.0 * r->accuracy;
    mean /= static_cast<double>(g.size());
    double var = 0.0;
    for (const ResultRow* r : g) var += (100.0 * r->accuracy - mean) * (100.0 * r->accuracy - mean);
    const double sd = g.size() > 1 ? std::sqrt(var / static_cast<double>(g.size() - 1)) : 0.0;
    const ResultRow& f = *g.front();
    out += f.method + "," + std::to_string(f.num_variations) + "," + f.mode + "," + f.variation_source + "," +
           std::to_string(f.iterations) + "," + f.corruption + "," + std::to_string(f.severity) + "," +
           std::to_string(g.size()) + "," + fmt_double(mean) + "," + fmt_double(sd) + "\n";
  }
  return out;
}

void emit_report(const std::vector<ResultRow>& rows, const std::filesystem::path& dir, const std::string& format) {
  if (rows.empty()) throw ConfigError("no rows to report (check the method/corruption filters)");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  if (format == "csv") {
    write_text(dir / "rows.csv", rows_to_csv(rows));
  } else {
    write_text(dir / "rows.json", rows_to_json(rows));
  }
  write_text(dir / "summary.csv", summary_to_csv(summarize(rows)));
  write_text(dir / "sweep.csv", sweep_to_csv(rows));
}

std::vector<ResultRow> load_rows(const std::filesystem::path& dir) {
  if (std::filesystem::exists(dir / "rows.json")) return rows_from_json(read_text(dir / "rows.json"));
  return rows_from_csv(read_text(dir / "rows.csv"));
}

std::vector<OrderingCheck> ordering_checks(const std::vector<ResultRow>& rows) {
  const Means means(rows);
  std::vector<OrderingCheck> checks;
  auto at_least = [&](const std::string& name, std::optional<double> lhs, std::optional<double> rhs, double margin) {
    if (lhs && rhs) checks.push_back({name, *lhs, *rhs + margin, *lhs >= *rhs + margin});
  };

  // svwa variants present, as (nv, mode, source) keyed by their variant string
  std::map<std::string, const ResultRow*> svwa;
  for (const ResultRow& r : rows) {
    if (r.method == "svwa") svwa.emplace(r.variant(), &r);
  }
  auto name_of = [](std::size_t nv, const std::string& mode, const std::string& source) {
    return "svwa/nv=" + std::to_string(nv) + "/" + mode + "/" + source;
  };

  for (const std::string& c : means.corruptions) {
    const auto src = means.mean("source-only", c);
    const auto tent = means.mean("tent", c);
    at_least(c + ": tent >= source-only + 1", tent, src, 1.0);

    std::vector<std::size_t> nvs;
    for (const auto& [variant, row] : svwa) {
      if (row->mode == "parallel" && row->variation_source == "sampling" && means.mean(variant, c)) {
        nvs.push_back(row->num_variations);
        at_least(c + ": " + variant + " >= tent - 0.5", means.mean(variant, c), tent, -0.5);
        at_least(c + ": " + variant + " >= source-only + 1", means.mean(variant, c), src, 1.0);
      }
    }
    if (nvs.size() >= 2) {
      const auto [lo, hi] = std::minmax_element(nvs.begin(), nvs.end());
      at_least(c + ": " + name_of(*hi, "parallel", "sampling") + " >= " + name_of(*lo, "parallel", "sampling") +
                   " - 0.3",
               means.mean(name_of(*hi, "parallel", "sampling"), c),
               means.mean(name_of(*lo, "parallel", "sampling"), c), -0.3);
    }

    for (const auto& [variant, row] : svwa) {
      if (row->variation_source != "sampling") continue;
      const std::size_t nv = row->num_variations;
      const auto base = means.mean(variant, c);
      if (row->mode == "parallel") {
        for (const auto& [source, margin] : {std::pair{"jitter", -0.5}, {"rotation", 0.0}, {"flip", 0.0}}) {
          const std::string other = name_of(nv, "parallel", source);
          at_least(c + ": " + variant + " >= " + other + (margin < 0 ? " - 0.5" : ""), base, means.mean(other, c),
                   margin);
        }
        const auto seq = means.mean(name_of(nv, "sequential", "sampling"), c);
        if (base && seq) {
          const double gap = std::abs(*base - *seq);
          checks.push_back({c + ": |" + variant + " - sequential| <= 1.5", gap, 1.5, gap <= 1.5});
        }
      }
    }
  }
  return checks;
}

}  // namespace svwa::harness
