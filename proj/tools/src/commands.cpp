#include "tscmrar_cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "tscmrar/baselines.hpp"
#include "tscmrar/casas.hpp"
#include "tscmrar/checkpoint.hpp"
#include "tscmrar/error.hpp"
#include "tscmrar/gradcheck.hpp"
#include "tscmrar/metrics.hpp"
#include "tscmrar/model.hpp"
#include "tscmrar/random.hpp"
#include "tscmrar/synth.hpp"
#include "tscmrar/training.hpp"
#include "tscmrar/windowing.hpp"

namespace tscmrar::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kGradcheckTolerance = 1e-4;

const SensorVocabulary& vocab() { return SensorVocabulary::adlmr(); }

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

void require_out(const RunConfig& c) {
  if (c.out.empty()) throw UsageError("--out is required");
}

// Creates the output directory and echoes the config into it.
void prepare_out(const RunConfig& c) {
  require_out(c);
  fs::create_directories(c.out);
  open_output(c.out / "config.txt") << format_config(c);
}

ParseOptions parse_options(const RunConfig& c) {
  ParseOptions o;
  o.unknown_sensors = c.skip_unknown ? UnknownSensorPolicy::kSkip : UnknownSensorPolicy::kError;
  return o;
}

CorpusOptions corpus_options(const RunConfig& c) {
  CorpusOptions o;
  o.parse = parse_options(c);
  o.on_value = c.on_value;
  o.k = c.k;
  return o;
}

std::vector<std::string> corpus_names(const RunConfig& c) {
  if (c.data.empty()) throw UsageError("--data is required");
  std::vector<std::string> names;
  for (const auto& p : list_corpus_files(c.data)) names.push_back(p.filename().string());
  return names;
}

DatasetSplit make_split(const RunConfig& c, std::span<const std::string> names) {
  return split_files(names, c.split, derive_seed(c.seed, "split"));
}

std::vector<SampleWindow> load_windows(const RunConfig& c, std::span<const std::string> names) {
  std::vector<WindowedFile> files;
  const auto options = corpus_options(c);
  for (const auto& name : names) files.push_back(load_windowed_file(c.data / name, options));
  auto windows = concat_windows(files);
  return windows;
}

void write_split(const RunConfig& c, const DatasetSplit& split) {
  auto out = open_output(c.out / "split.csv");
  out << "file,role\n";
  for (const auto& f : split.train_files) out << f << ",train\n";
  for (const auto& f : split.test_files) out << f << ",test\n";
}

void write_reports(const RunConfig& c, const EvaluationReport& report, std::ostream& out) {
  {
    auto csv = open_output(c.out / "metrics.csv");
    write_metrics_csv_header(csv, report.resident_matrix.classes());
    write_metrics_csv_row(csv, c.method, report);
  }
  {
    auto txt = open_output(c.out / "metrics.txt");
    write_metrics_report(txt, c.method, report);
  }
  {
    auto m = open_output(c.out / "resident_confusion.csv");
    report.resident_matrix.write_csv(m);
  }
  {
    auto m = open_output(c.out / "activity_confusion.csv");
    report.activity_matrix.write_csv(m);
  }
  write_metrics_report(out, c.method, report);
}

EvaluationReport run_baseline(const RunConfig& c, std::span<const SampleWindow> train,
                              std::span<const SampleWindow> test) {
  if (train.empty() || test.empty()) throw DataError("baseline needs non-empty train and test sets");
  const auto train_flat = flatten(train);
  std::vector<LabelPair> truth, predicted;
  truth.reserve(test.size());
  predicted.reserve(test.size());
  if (c.method == "knn") {
    for (const auto& w : test) {
      truth.push_back(w.label);
      predicted.push_back(knn_predict(train_flat, flatten(w), c.neighbors));
    }
  } else {
    DecisionTreeConfig dc;
    if (c.max_depth > 0) dc.max_depth = c.max_depth;
    dc.min_leaf = c.min_leaf;
    const auto tree = dt_fit(train_flat, dc);
    for (const auto& w : test) {
      truth.push_back(w.label);
      predicted.push_back(dt_predict(tree, flatten(w)));
    }
  }
  return evaluate_labels(truth, predicted);
}

FitResult run_fit(const RunConfig& c, std::span<const SampleWindow> windows, std::ostream& out) {
  const auto config = c.train_config();
  return fit(windows, config, c.k, vocab().size(), {}, [&](std::size_t epoch, const EpochStats& s) {
    out << "epoch " << epoch + 1 << '/' << config.epochs << " avg_loss " << s.avg_loss
        << " max " << s.max_batch_loss << " min " << s.min_batch_loss << '\n';
  });
}

int run_cv(const RunConfig& c, std::span<const std::string> names, std::ostream& out) {
  if (c.cv > names.size()) {
    throw DataError("cv=" + std::to_string(c.cv) + " exceeds the " +
                    std::to_string(names.size()) + " corpus files");
  }
  std::vector<std::string> order(names.begin(), names.end());
  std::sort(order.begin(), order.end());
  Rng rng(derive_seed(c.seed, "split"));
  rng.shuffle(order);

  auto csv = open_output(c.out / "cv_metrics.csv");
  write_metrics_csv_header(csv, LabelSpace{}.residents);
  double resident_sum = 0.0, activity_sum = 0.0;
  for (std::size_t fold = 0; fold < c.cv; ++fold) {
    std::vector<std::string> train, test;
    for (std::size_t i = 0; i < order.size(); ++i) (i % c.cv == fold ? test : train).push_back(order[i]);
    const auto train_windows = load_windows(c, train);
    const auto test_windows = load_windows(c, test);
    out << "fold " << fold + 1 << '/' << c.cv << ": " << train.size() << " train files, "
        << test.size() << " test files\n";
    EvaluationReport report;
    if (c.method == "tsc") {
      const auto result = run_fit(c, train_windows, out);
      report = evaluate(test_windows, result.params);
    } else {
      report = run_baseline(c, train_windows, test_windows);
    }
    write_metrics_csv_row(csv, c.method + "/fold" + std::to_string(fold + 1), report);
    resident_sum += report.resident.accuracy;
    activity_sum += report.activity_accuracy;
  }
  out << "mean resident_accuracy " << resident_sum / static_cast<double>(c.cv)
      << " activity_accuracy " << activity_sum / static_cast<double>(c.cv) << '\n';
  return kExitOk;
}

ModelParams load_checkpoint(const RunConfig& c) {
  if (c.checkpoint.empty()) throw UsageError("--checkpoint is required");
  return load_params(c.checkpoint, ModelParams(c.k, vocab().size()));
}

}  // namespace

int cmd_ingest(const RunConfig& c, std::ostream& out) {
  const auto paths = [&] {
    if (c.data.empty()) throw UsageError("--data is required");
    return list_corpus_files(c.data);
  }();
  require_out(c);
  if (fs::exists(c.out) && fs::equivalent(c.out, c.data)) {
    throw UsageError("--out must differ from --data");
  }
  prepare_out(c);
  fs::create_directories(c.out / "events");

  const auto options = parse_options(c);
  std::vector<std::size_t> sensor_counts(vocab().size(), 0);
  auto counts = open_output(c.out / "counts.csv");
  counts << "file,events,on_events,unlabeled_skipped,unknown_skipped\n";
  std::size_t total_events = 0, total_on = 0;
  for (const auto& path : paths) {
    const CasasFile file = parse_file(path, options);
    const auto on = filter_on(file.events, c.on_value);
    for (const auto& e : on) ++sensor_counts[e.sensor];
    auto csv = open_output(c.out / "events" / (file.name + ".csv"));
    write_events_csv(csv, file.events, vocab());
    counts << file.name << ',' << file.events.size() << ',' << on.size() << ','
           << file.unlabeled_skipped << ',' << file.unknown_skipped << '\n';
    out << file.name << ": " << file.events.size() << " events, " << on.size() << ' '
        << c.on_value << '\n';
    total_events += file.events.size();
    total_on += on.size();
  }
  auto vcsv = open_output(c.out / "vocabulary.csv");
  vcsv << "index,tag,on_events\n";
  for (std::size_t i = 0; i < vocab().size(); ++i) {
    vcsv << i + 1 << ',' << vocab().tag(i) << ',' << sensor_counts[i] << '\n';
  }
  out << paths.size() << " files, " << total_events << " events, " << total_on << ' '
      << c.on_value << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  const auto names = corpus_names(c);
  prepare_out(c);
  if (c.cv > 0) return run_cv(c, names, out);

  const auto split = make_split(c, names);
  write_split(c, split);
  const auto train = load_windows(c, split.train_files);
  const auto test = load_windows(c, split.test_files);
  out << split.train_files.size() << " train files (" << train.size() << " windows), "
      << split.test_files.size() << " test files (" << test.size() << " windows)\n";

  if (c.method != "tsc") {
    write_reports(c, run_baseline(c, train, test), out);
    return kExitOk;
  }
  const auto result = run_fit(c, train, out);
  {
    auto log = open_output(c.out / "loss_log.csv");
    write_loss_log_csv(log, result.log);
  }
  const fs::path checkpoint = c.checkpoint.empty() ? c.out / "model.ckpt" : c.checkpoint;
  save_params(result.params, checkpoint);
  out << "checkpoint " << checkpoint.string() << '\n';
  if (!test.empty()) write_reports(c, evaluate(test, result.params), out);
  return kExitOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const auto names = corpus_names(c);
  if (c.method == "tsc" && c.checkpoint.empty()) {
    throw UsageError("eval --method tsc requires --checkpoint");
  }
  prepare_out(c);
  const auto split = make_split(c, names);
  write_split(c, split);
  const auto test = load_windows(c, split.test_files);
  if (c.method == "tsc") {
    const auto params = load_checkpoint(c);
    write_reports(c, evaluate(test, params), out);
  } else {
    const auto train = load_windows(c, split.train_files);
    write_reports(c, run_baseline(c, train, test), out);
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  const auto names = corpus_names(c);
  prepare_out(c);
  const auto split = make_split(c, names);
  write_split(c, split);
  const auto train = load_windows(c, split.train_files);
  const auto grid = c.sweep_grid();
  out << "sweeping " << grid.size() << " points on " << train.size() << " windows\n";
  const auto rows = sweep(train, grid, c.train_config(), c.k, vocab().size(), {}, c.jobs);
  {
    auto csv = open_output(c.out / "sweep.csv");
    write_sweep_csv(csv, rows);
  }
  const auto best = std::min_element(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.avg_loss < b.avg_loss;
  });
  out << "best alpha " << best->batch_size << " beta " << best->l2_weight << " gamma "
      << best->learning_rate << " avg_loss " << best->avg_loss << '\n';
  return kExitOk;
}

int cmd_predict(const RunConfig& c, std::ostream& out) {
  if (c.event.empty()) throw UsageError("--event is required");
  const auto params = load_checkpoint(c);
  if (!c.out.empty()) prepare_out(c);
  const auto options = parse_options(c);

  std::vector<int> sensors;
  if (!c.history.empty()) {
    std::ifstream in(c.history);
    if (!in) throw DataError("cannot read history file '" + c.history.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      const auto parsed = parse_line(line, options, c.history.string(), ++line_no);
      if (parsed.status != LineStatus::kEvent && parsed.status != LineStatus::kUnlabeled) continue;
      if (parsed.event.value != c.on_value) continue;
      sensors.push_back(static_cast<int>(parsed.event.sensor));
    }
  }
  const auto parsed = parse_line(c.event, options, "--event", 1);
  if (parsed.status != LineStatus::kEvent && parsed.status != LineStatus::kUnlabeled) {
    throw DataError("--event does not hold a known sensor event");
  }
  const std::size_t keep = std::min(sensors.size(), c.k - 1);
  std::vector<int> window(c.k - 1 - keep, kPadSensor);
  window.insert(window.end(), sensors.end() - static_cast<std::ptrdiff_t>(keep), sensors.end());
  window.push_back(static_cast<int>(parsed.event.sensor));

  const auto prediction = predict(window_from_sensors(window, {}, vocab().size()), params);
  const LabelPair label = prediction.label();
  out << "resident " << label.resident + 1 << " activity " << label.activity + 1 << ' '
      << adlmr_activity_names()[label.activity] << '\n';
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& c, std::ostream& out) {
  if (!c.out.empty()) prepare_out(c);
  ModelParams params = init_params(c.k, vocab().size(), derive_seed(c.seed, "init"));
  Rng rng(derive_seed(c.seed, "gradcheck"));
  // Nonzero biases keep pre-activations off the ReLU kink.
  for (auto& p : params.tensors()) {
    if (p.role != ParamRole::kBias) continue;
    for (double& v : p.value.data()) v = rng.uniform(-0.1, 0.1);
  }
  std::vector<int> sensors(c.k);
  for (int& s : sensors) s = static_cast<int>(rng.below(vocab().size()));
  const LabelSpace labels;
  const LabelPair label{static_cast<std::size_t>(rng.below(labels.residents)),
                        static_cast<std::size_t>(rng.below(labels.activities))};
  const SampleWindow window = window_from_sensors(sensors, label, vocab().size());

  const LossFn loss = [&](Tape& tape) {
    const auto vars = ModelVars::trainable(tape, params);
    const auto pred = record_predict(tape, window, vars);
    return record_joint_loss(tape, pred, label, vars, c.beta);
  };
  const auto report =
      gradient_check(loss, params.tensors(), c.probes, derive_seed(c.seed, "probe"));
  if (!c.out.empty()) {
    auto csv = open_output(c.out / "gradcheck.csv");
    csv << std::setprecision(17) << "param,index,analytic,numeric,rel_error\n";
    for (const auto& p : report.probes) {
      csv << p.param << ',' << p.index << ',' << p.analytic << ',' << p.numeric << ','
          << p.rel_error << '\n';
    }
  }
  out << "probes " << report.probes.size() << " max_rel_error " << report.max_rel_error << '\n';
  if (!std::isfinite(report.max_rel_error) || report.max_rel_error >= kGradcheckTolerance) {
    out << "FAIL: tolerance " << kGradcheckTolerance << '\n';
    return kExitNumeric;
  }
  out << "ok\n";
  return kExitOk;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  prepare_out(c);
  SynthProfile profile;
  profile.files = c.synth_files;
  profile.events_per_file = c.synth_events;
  const auto paths = write_synth_corpus(profile, c.seed, c.out / "corpus");
  out << "wrote " << paths.size() << " files to " << (c.out / "corpus").string() << '\n';
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tree-structure CNN for multi-resident activity recognition", "tscmrar"};
  app.require_subcommand(1);
  app.fallthrough();

  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  static constexpr Flag kFlags[] = {
      {"--data", "data", "corpus directory"},
      {"--out", "out", "output directory"},
      {"--checkpoint", "checkpoint", "model checkpoint path"},
      {"--seed", "seed", "root seed (default 1)"},
      {"--k", "k", "window size (default 8)"},
      {"--alpha", "alpha", "batch size (default 128)"},
      {"--beta", "beta", "L2 weight (default 0.0004)"},
      {"--gamma", "gamma", "learning rate (default 0.0002)"},
      {"--epochs", "epochs", "training epochs (default 25)"},
      {"--method", "method", "tsc, knn or dt (default tsc)"},
      {"--cv", "cv", "cross-validation folds over files (0 = off)"},
      {"--split", "split", "train fraction of files (default 0.7)"},
      {"--on-value", "on_value", "event value kept as an ON event"},
      {"--jobs", "jobs", "sweep worker threads"},
      {"--probes", "probes", "gradcheck probe count (default 100)"},
      {"--history", "history", "predict: file of earlier events"},
      {"--event", "event", "predict: the event line to classify"},
  };
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& f : kFlags) {
    options[f.key] = app.add_option(f.name, values[f.key], f.help);
  }
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file");
  std::vector<std::string> overrides;
  app.add_option("--set", overrides, "extra key=value setting (repeatable)");
  bool skip_unknown = false;
  app.add_flag("--skip-unknown", skip_unknown, "skip unknown sensor tags instead of failing");

  app.add_subcommand("ingest", "parse a corpus and write canonical event CSVs");
  app.add_subcommand("train", "train a model (or baseline) and evaluate on the held-out files");
  app.add_subcommand("eval", "evaluate a checkpoint or baseline on the held-out files");
  app.add_subcommand("sweep", "grid search over alpha, beta, gamma");
  app.add_subcommand("predict", "classify one event given its history");
  app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  app.add_subcommand("synth", "write a synthetic corpus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) load_config_file(config, config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [key, option] : options) {
      if (option->count() > 0) apply_setting(config, key, values[key]);
    }
    if (skip_unknown) config.skip_unknown = true;
    resolve(config);

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "ingest") return cmd_ingest(config, out);
    if (name == "train") return cmd_train(config, out);
    if (name == "eval") return cmd_eval(config, out);
    if (name == "sweep") return cmd_sweep(config, out);
    if (name == "predict") return cmd_predict(config, out);
    if (name == "gradcheck") return cmd_gradcheck(config, out);
    return cmd_synth(config, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace tscmrar::cli
