#include "tscmrar_cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace tscmrar::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            const char* expected) {
  throw UsageError("invalid value '" + std::string(value) + "' for " + std::string(key) +
                   " (expected " + expected + ")");
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || end != value.data() + value.size() || value.empty()) {
    bad_value(key, value, "a non-negative integer");
  }
  return out;
}

std::size_t parse_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || end != value.data() + value.size() || value.empty()) {
    bad_value(key, value, "a number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false");
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view key, std::string_view value, Parse parse) {
  std::vector<T> out;
  while (true) {
    const auto comma = value.find(',');
    out.push_back(parse(key, trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

std::string fmt(double v) {
  char buf[400];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  return std::string(buf, end);
}

template <typename T>
std::string fmt_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string_view, Field>& fields() {
  static const std::map<std::string_view, Field> table = [] {
    std::map<std::string_view, Field> t;
    auto path = [&](std::string_view key, std::filesystem::path RunConfig::*m) {
      t[key] = {[m](RunConfig& c, std::string_view v) { c.*m = std::filesystem::path(v); },
                [m](const RunConfig& c) { return (c.*m).string(); }};
    };
    auto size = [&](std::string_view key, std::size_t RunConfig::*m) {
      t[key] = {[m, key](RunConfig& c, std::string_view v) { c.*m = parse_size(key, v); },
                [m](const RunConfig& c) { return std::to_string(c.*m); }};
    };
    auto real = [&](std::string_view key, double RunConfig::*m) {
      t[key] = {[m, key](RunConfig& c, std::string_view v) { c.*m = parse_double(key, v); },
                [m](const RunConfig& c) { return fmt(c.*m); }};
    };
    auto text = [&](std::string_view key, std::string RunConfig::*m) {
      t[key] = {[m](RunConfig& c, std::string_view v) { c.*m = std::string(v); },
                [m](const RunConfig& c) { return c.*m; }};
    };
    path("data", &RunConfig::data);
    path("out", &RunConfig::out);
    path("checkpoint", &RunConfig::checkpoint);
    t["seed"] = {[](RunConfig& c, std::string_view v) { c.seed = parse_u64("seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }};
    size("k", &RunConfig::k);
    size("alpha", &RunConfig::alpha);
    real("beta", &RunConfig::beta);
    real("gamma", &RunConfig::gamma);
    size("epochs", &RunConfig::epochs);
    text("method", &RunConfig::method);
    size("cv", &RunConfig::cv);
    real("split", &RunConfig::split);
    text("on_value", &RunConfig::on_value);
    t["skip_unknown"] = {
        [](RunConfig& c, std::string_view v) { c.skip_unknown = parse_bool("skip_unknown", v); },
        [](const RunConfig& c) { return std::string(c.skip_unknown ? "true" : "false"); }};
    size("neighbors", &RunConfig::neighbors);
    size("max_depth", &RunConfig::max_depth);
    size("min_leaf", &RunConfig::min_leaf);
    size("jobs", &RunConfig::jobs);
    size("probes", &RunConfig::probes);
    size("sweep_epochs", &RunConfig::sweep_epochs);
    t["sweep_alpha"] = {[](RunConfig& c, std::string_view v) {
                          c.sweep_alpha = parse_list<std::size_t>("sweep_alpha", v, parse_size);
                        },
                        [](const RunConfig& c) { return fmt_list(c.sweep_alpha); }};
    t["sweep_beta"] = {[](RunConfig& c, std::string_view v) {
                         c.sweep_beta = parse_list<double>("sweep_beta", v, parse_double);
                       },
                       [](const RunConfig& c) { return fmt_list(c.sweep_beta); }};
    t["sweep_gamma"] = {[](RunConfig& c, std::string_view v) {
                          c.sweep_gamma = parse_list<double>("sweep_gamma", v, parse_double);
                        },
                        [](const RunConfig& c) { return fmt_list(c.sweep_gamma); }};
    size("synth_files", &RunConfig::synth_files);
    size("synth_events", &RunConfig::synth_events);
    path("history", &RunConfig::history);
    text("event", &RunConfig::event);
    return t;
  }();
  return table;
}

}  // namespace

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.batch_size = alpha;
  c.l2_weight = beta;
  c.learning_rate = gamma;
  c.epochs = epochs;
  c.seed = seed;
  return c;
}

SweepGrid RunConfig::sweep_grid() const {
  SweepGrid g;
  g.batch_sizes = sweep_alpha;
  g.l2_weights = sweep_beta;
  g.learning_rates = sweep_gamma;
  g.tuning_epochs = sweep_epochs;
  return g;
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = {
      "data",        "out",        "checkpoint",  "seed",         "k",
      "alpha",       "beta",       "gamma",       "epochs",       "method",
      "cv",          "split",      "on_value",    "skip_unknown", "neighbors",
      "max_depth",   "min_leaf",   "jobs",        "probes",       "sweep_epochs",
      "sweep_alpha", "sweep_beta", "sweep_gamma", "synth_files",  "synth_events",
      "history",     "event"};
  return keys;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  const auto& table = fields();
  const auto it = table.find(key);
  if (it == table.end()) throw UsageError("unknown config key '" + std::string(key) + "'");
  it->second.set(config, value);
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw UsageError(where + "expected key=value");
    const std::string key(trim(view.substr(0, eq)));
    if (!seen.insert(key).second) throw UsageError(where + "repeated key '" + key + "'");
    try {
      apply_setting(config, key, trim(view.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(where + e.what());
    }
  }
}

void resolve(RunConfig& config) {
  for (auto* p : {&config.data, &config.out, &config.checkpoint, &config.history}) {
    if (!p->empty()) *p = std::filesystem::absolute(*p).lexically_normal();
  }
  if (config.method != "tsc" && config.method != "knn" && config.method != "dt") {
    throw UsageError("method must be tsc, knn or dt, got '" + config.method + "'");
  }
  if (config.k < 2) throw UsageError("k must be at least 2");
  if (config.alpha == 0) throw UsageError("alpha must be positive");
  if (!(config.beta >= 0.0)) throw UsageError("beta must be non-negative");
  if (!(config.gamma > 0.0)) throw UsageError("gamma must be positive");
  if (!(config.split > 0.0 && config.split < 1.0)) {
    throw UsageError("split must be in (0, 1)");
  }
  if (config.cv == 1) throw UsageError("cv needs at least 2 folds");
  if (config.neighbors == 0) throw UsageError("neighbors must be positive");
  if (config.min_leaf == 0) throw UsageError("min_leaf must be positive");
  if (config.jobs == 0) throw UsageError("jobs must be positive");
  if (config.probes == 0) throw UsageError("probes must be positive");
  if (config.sweep_alpha.empty() || config.sweep_beta.empty() || config.sweep_gamma.empty()) {
    throw UsageError("sweep grid axes must not be empty");
  }
}

std::string format_config(const RunConfig& config) {
  std::ostringstream out;
  const auto& table = fields();
  for (const auto key : config_keys()) {
    out << key << '=' << table.at(key).get(config) << '\n';
  }
  return out.str();
}

}  // namespace tscmrar::cli
