#include "svwa/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>

#include "svwa/corruptions/corruption.hpp"
#include "svwa/error.hpp"
#include "svwa/io/binary.hpp"

namespace svwa::harness {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError("bad value '" + std::string(value) + "' for " + std::string(key) + " (expected " + expected + ")");
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    bad_value(key, value, "a non-negative integer");
  }
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) bad_value(key, value, "a number");
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true or false");
}

std::vector<std::size_t> to_sizes(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  for (const std::string& item : split_list(value)) out.push_back(to_u64(key, item));
  return out;
}

std::string from_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) os << (i ? "," : "") << items[i];
  return os.str();
}

struct Option {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
};

#define SVWA_SIZE_OPTION(name)                                                         \
  Option {                                                                             \
    #name, [](const ExperimentConfig& c) { return std::to_string(c.name); },           \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.name = to_u64(k, v); } \
  }
#define SVWA_DOUBLE_OPTION(name)                                                        \
  Option {                                                                              \
    #name, [](const ExperimentConfig& c) { return from_double(c.name); },               \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.name = to_double(k, v); } \
  }
#define SVWA_PATH_OPTION(name)                                                   \
  Option {                                                                       \
    #name, [](const ExperimentConfig& c) { return c.name.string(); },            \
        [](ExperimentConfig& c, std::string_view, std::string_view v) { c.name = std::string(v); } \
  }
#define SVWA_LIST_OPTION(name)                                                      \
  Option {                                                                          \
    #name, [](const ExperimentConfig& c) { return join(c.name); },                  \
        [](ExperimentConfig& c, std::string_view, std::string_view v) { c.name = split_list(v); } \
  }
#define SVWA_SIZES_OPTION(name)                                                       \
  Option {                                                                            \
    #name, [](const ExperimentConfig& c) { return join(c.name); },                    \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.name = to_sizes(k, v); } \
  }
#define SVWA_BOOL_OPTION(name)                                                            \
  Option {                                                                                \
    #name, [](const ExperimentConfig& c) { return std::string(c.name ? "true" : "false"); }, \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.name = to_bool(k, v); } \
  }

const std::vector<Option>& options() {
  static const std::vector<Option> table{
      SVWA_PATH_OPTION(dataset),
      SVWA_SIZE_OPTION(train_per_class),
      SVWA_SIZE_OPTION(test_per_class),
      SVWA_SIZE_OPTION(num_points),
      SVWA_SIZE_OPTION(data_seed),
      SVWA_SIZES_OPTION(mlp_channels),
      SVWA_SIZES_OPTION(head_dims),
      SVWA_SIZE_OPTION(fps_points),
      SVWA_PATH_OPTION(checkpoint),
      SVWA_SIZE_OPTION(epochs),
      SVWA_DOUBLE_OPTION(pretrain_lr),
      SVWA_SIZE_OPTION(pretrain_batch_size),
      SVWA_SIZE_OPTION(pretrain_seed),
      SVWA_LIST_OPTION(methods),
      SVWA_LIST_OPTION(corruptions),
      SVWA_SIZES_OPTION(num_variations),
      SVWA_LIST_OPTION(modes),
      SVWA_LIST_OPTION(variation_sources),
      SVWA_SIZE_OPTION(iterations),
      SVWA_DOUBLE_OPTION(lr),
      SVWA_SIZE_OPTION(batch_size),
      SVWA_SIZE_OPTION(prediction_seed),
      SVWA_BOOL_OPTION(reset_to_pretrained),
      SVWA_SIZE_OPTION(seed),
      SVWA_SIZE_OPTION(repeats),
      SVWA_PATH_OPTION(out),
      Option{"format", [](const ExperimentConfig& c) { return c.format; },
             [](ExperimentConfig& c, std::string_view, std::string_view v) { c.format = std::string(v); }},
      SVWA_BOOL_OPTION(record_timing),
  };
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (train_per_class < 1 || test_per_class < 1) throw ConfigError("per-class counts must be >= 1");
  if (num_points < 8) throw ConfigError("num_points must be >= 8");
  if (fps_points < 1 || fps_points > num_points) throw ConfigError("fps_points must be in [1, num_points]");
  if (mlp_channels.empty()) throw ConfigError("mlp_channels must not be empty");
  if (!(pretrain_lr > 0.0)) throw ConfigError("pretrain_lr must be > 0");
  if (pretrain_batch_size < 2) throw ConfigError("pretrain_batch_size must be >= 2");
  if (methods.empty() || corruptions.empty() || num_variations.empty() || modes.empty() ||
      variation_sources.empty()) {
    throw ConfigError("methods, corruptions, num_variations, modes and variation_sources need at least one entry");
  }
  for (const std::string& m : methods) parse_method(m);
  for (const std::string& c : corruptions) {
    if (c != "clean") CorruptionSpec::parse(c);
  }
  for (const std::string& m : modes) parse_adapt_mode(m);
  for (const std::string& s : variation_sources) parse_variation_source(s);
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  for (std::size_t nv : num_variations) {
    AdaptConfig a;
    a.num_variations = nv;
    a.iterations = iterations;
    a.lr = lr;
    a.batch_size = batch_size;
    a.validate();
  }
}

PointNetLiteConfig ExperimentConfig::model_config(std::size_t num_classes) const {
  PointNetLiteConfig m;
  m.mlp_channels = mlp_channels;
  m.head_dims = head_dims;
  m.num_classes = num_classes;
  m.fps_points = fps_points;
  m.validate();
  return m;
}

void set_option(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  for (const Option& o : options()) {
    if (key == o.key) {
      o.set(cfg, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  for (const auto& [key, value] : parse_key_values(text)) set_option(base, key, value);
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  const std::vector<std::uint8_t> bytes = io::read_file(path);
  return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), std::move(base));
}

std::string to_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const Option& o : options()) out += std::string(o.key) + " = " + o.get(cfg) + "\n";
  return out;
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  const std::string text = to_text(cfg);
  io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fingerprint(const ExperimentConfig& cfg) {
  ExperimentConfig settings = cfg;
  const ExperimentConfig defaults;
  settings.out = defaults.out;
  settings.format = defaults.format;
  settings.record_timing = defaults.record_timing;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_text(settings))));
  return buf;
}

}  // namespace svwa::harness
