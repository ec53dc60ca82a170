#pragma once

// Command implementations behind the `har` executable. Each command returns a process
// exit code: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "har/checkpoint.hpp"
#include "har/data.hpp"
#include "har/gradcheck.hpp"
#include "har/io.hpp"
#include "har/knn.hpp"
#include "har/metrics.hpp"
#include "har/trainer.hpp"

namespace har::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericFailure = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flag first, then HAR_DATA_DIR.
inline fs::path resolve_data_dir(const std::string& flag) {
  std::string dir = flag;
  if (dir.empty())
    if (const char* env = std::getenv("HAR_DATA_DIR")) dir = env;
  if (dir.empty()) throw UsageError("no dataset directory: pass --data-dir or set HAR_DATA_DIR");
  if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir);
  return dir;
}

struct PreparedData {
  data::WindowedDataset train, test;
  data::StandardizationStats stats;
  LabeledWindows train_windows, test_windows;
};

// Loads both splits and standardizes them with statistics fitted on train only.
inline PreparedData prepare(const fs::path& root, std::ostream& err, bool with_features = false) {
  PreparedData p;
  p.train = data::load_split(root, data::Split::train, with_features);
  p.test = data::load_split(root, data::Split::test, with_features);
  p.stats = data::fit_standardizer(p.train.signals);
  for (const auto& w : p.stats.warnings) err << "warning: " << w << "\n";
  p.train_windows = {data::apply_standardizer(p.train.signals, p.stats), p.train.labels.classes};
  p.test_windows = {data::apply_standardizer(p.test.signals, p.stats), p.test.labels.classes};
  return p;
}

// Seeded subset of n windows, kept in original order.
inline LabeledWindows subset(const LabeledWindows& all, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n >= all.size()) return all;
  std::vector<std::size_t> idx(all.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(derive_seed(seed, 3));
  fisher_yates(std::span<std::size_t>(idx), rng);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  LabeledWindows out;
  out.x = gather_rows(all.x, idx);
  for (auto i : idx) out.y.push_back(all.y[i]);
  return out;
}

inline std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError("--sweep expects LO:HI, got '" + s + "'");
  std::size_t lo = 0, hi = 0;
  try {
    std::size_t used = 0;
    lo = std::stoul(s.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("lo");
    hi = std::stoul(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1) throw std::invalid_argument("hi");
  } catch (const std::logic_error&) {
    throw UsageError("--sweep expects LO:HI with positive integers, got '" + s + "'");
  }
  if (lo < 1 || lo > hi) throw UsageError("--sweep range " + s + " is empty or starts below 1");
  return {lo, hi};
}

inline void emit_report(const metrics::ConfusionMatrix& cm, const std::string& report_out,
                        const std::string& confusion_out, std::ostream& out) {
  const auto rep = metrics::classification_report(cm);
  if (!report_out.empty()) io::write_atomic(report_out, rep.to_json().dump(2) + "\n");
  if (!confusion_out.empty()) io::write_atomic(confusion_out, cm.to_csv());
  out << std::left << std::setw(20) << "class" << std::right << std::setw(10) << "precision"
      << std::setw(10) << "recall" << std::setw(10) << "f1" << std::setw(10) << "support" << "\n";
  auto row = [&](const std::string& name, double p, double r, double f, std::uint64_t s) {
    out << std::left << std::setw(20) << name << std::right << std::fixed << std::setprecision(4)
        << std::setw(10) << p << std::setw(10) << r << std::setw(10) << f << std::setw(10) << s
        << "\n";
  };
  for (const auto& c : rep.per_class) row(c.name, c.precision, c.recall, c.f1, c.support);
  row("weighted avg", rep.weighted.precision, rep.weighted.recall, rep.weighted.f1,
      rep.weighted.support);
  row("macro avg", rep.macro.precision, rep.macro.recall, rep.macro.f1, rep.macro.support);
  out << "accuracy " << std::fixed << std::setprecision(6) << rep.accuracy << "\n";
  out.unsetf(std::ios::floatfield);
}

struct InspectOptions {
  std::string data_dir, out_dir = "histograms";
  std::size_t bins = 50;
  bool raw = false;
};

inline int data_inspect(const InspectOptions& o, std::ostream& out, std::ostream& err) {
  if (o.bins < 2) throw UsageError("--bins must be at least 2");
  const auto root = resolve_data_dir(o.data_dir);
  auto p = prepare(root, err);
  for (const auto* split : {&p.train, &p.test}) {
    const bool is_train = split == &p.train;
    out << (is_train ? "train" : "test") << " windows=" << split->size() << "\n";
    std::vector<std::size_t> counts(data::kNumClasses, 0);
    for (int c : split->labels.classes) ++counts[static_cast<std::size_t>(c)];
    for (std::size_t c = 0; c < counts.size(); ++c)
      out << "  " << split->labels.class_names[c] << " " << counts[c] << "\n";
  }
  const Tensorf& x = o.raw ? p.train.signals : p.train_windows.x;
  out << "train channel statistics (" << (o.raw ? "raw" : "standardized") << "):\n";
  for (std::size_t c = 0; c < data::kChannels; ++c) {
    const auto m = data::channel_moments(x, c);
    const auto h = data::channel_histogram(x, c, o.bins);
    const fs::path file = fs::path(o.out_dir) / ("hist_" + std::string(data::kSignalNames[c]) + ".csv");
    io::write_atomic(file, h.to_csv());
    out << "  " << std::left << std::setw(12) << data::kSignalNames[c] << std::right
        << " mean=" << io::fixed(m.mean) << " std=" << io::fixed(m.std)
        << " skew=" << io::fixed(m.skewness) << " -> " << file.string() << "\n";
  }
  return kOk;
}

struct TrainOptions {
  std::string data_dir, arch = "multi";
  std::size_t epochs = 17, batch = 32, train_subset = 0;
  double lr = 0.001, beta1 = 0.9, beta2 = 0.999;
  std::uint64_t seed = 0;
  std::string checkpoint_out = "model.json", history_out = "history.csv";
  bool filters_reversed = false;
  bool quiet = false;
};

inline int train_command(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  if (o.epochs < 1 || o.batch < 1) throw UsageError("--epochs and --batch must be positive");
  if (!(o.lr > 0)) throw UsageError("--lr must be positive");
  ModelSpec spec = ModelSpec::standard(parse_arch(o.arch));
  if (o.filters_reversed) std::reverse(spec.filters.begin(), spec.filters.end());
  const auto root = resolve_data_dir(o.data_dir);
  auto p = prepare(root, err);
  const LabeledWindows train_set = subset(p.train_windows, o.train_subset, o.seed);

  Model<float> model = build_model<float>(spec, o.seed);
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.adam.lr = o.lr;
  cfg.adam.beta1 = o.beta1;
  cfg.adam.beta2 = o.beta2;
  cfg.seed = o.seed;
  if (!o.quiet)
    out << "training " << to_string(spec.arch) << "-head model (" << model.parameter_count()
        << " parameters) on " << train_set.size() << " windows, " << cfg.epochs << " epochs\n";
  TrainingHistory hist;
  try {
    hist = train(model, train_set, p.test_windows, cfg, [&](const EpochRecord& e) {
      if (!o.quiet)
        out << "epoch " << e.epoch << " train_loss=" << io::fixed(e.train_loss)
            << " train_acc=" << io::fixed(e.train_acc) << " test_loss=" << io::fixed(e.test_loss)
            << " test_acc=" << io::fixed(e.test_acc) << std::endl;
    });
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericFailure;
  }
  save_checkpoint(model, o.checkpoint_out);
  io::write_atomic(o.history_out, hist.to_csv());
  out << "final test accuracy " << io::fixed(hist.epochs.back().test_acc) << "\n";
  return kOk;
}

struct EvalOptions {
  std::string data_dir, checkpoint, arch;
  std::string report_out = "report.json", confusion_out = "confusion.csv";
};

inline int eval_command(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  std::optional<Arch> expected;
  if (!o.arch.empty()) expected = parse_arch(o.arch);
  const auto root = resolve_data_dir(o.data_dir);
  const Model<float> model = load_checkpoint<float>(o.checkpoint, expected);
  auto p = prepare(root, err);
  const auto r = evaluate(model, p.test_windows);
  const auto cm = metrics::confusion(r.predictions, p.test_windows.y, p.test.labels.class_names);
  emit_report(cm, o.report_out, o.confusion_out, out);
  out << "test loss " << io::fixed(r.mean_loss) << "\n";
  return kOk;
}

struct KnnOptions {
  std::string data_dir;
  std::size_t k = 10;
  std::string sweep, sweep_out;
  std::string report_out = "knn_report.json", confusion_out = "knn_confusion.csv";
};

inline int knn_command(const KnnOptions& o, std::ostream& out, std::ostream& err) {
  std::optional<std::pair<std::size_t, std::size_t>> range;
  if (!o.sweep.empty()) range = parse_range(o.sweep);
  if (o.k < 1) throw UsageError("--k must be at least 1");
  const auto root = resolve_data_dir(o.data_dir);
  const auto train = data::load_split(root, data::Split::train, true);
  const auto test = data::load_split(root, data::Split::test, true);
  (void)err;
  if (range) {
    if (range->second > train.size())
      throw UsageError("--sweep upper bound exceeds the " + std::to_string(train.size()) +
                       " training rows");
    const auto pts = knn::error_sweep(train.features.features, train.labels.classes,
                                      test.features.features, test.labels.classes, range->first,
                                      range->second);
    const std::string csv = knn::sweep_csv(pts);
    if (o.sweep_out.empty())
      out << csv;
    else
      io::write_atomic(o.sweep_out, csv);
    return kOk;
  }
  if (o.k > train.size()) throw UsageError("--k exceeds the number of training rows");
  const knn::KnnModel model(train.features.features, train.labels.classes, o.k);
  const auto preds = model.predict_all(test.features.features);
  const auto cm = metrics::confusion(preds, test.labels.classes, test.labels.class_names);
  out << "knn k=" << o.k << " on " << test.size() << " test windows\n";
  emit_report(cm, o.report_out, o.confusion_out, out);
  return kOk;
}

struct GradcheckOptions {
  std::uint64_t seed = 0;
};

inline int gradcheck_command(const GradcheckOptions& o, std::ostream& out,
                             const gradcheck::DenseBackwardFn& dense_backward =
                                 gradcheck::default_dense_backward()) {
  bool ok = true;
  out << std::left << std::setw(14) << "check" << std::right << std::setw(16) << "max_rel_err"
      << std::setw(12) << "tolerance" << std::setw(10) << "skipped" << "  result\n";
  for (const auto& rep : gradcheck::run_all(o.seed, dense_backward)) {
    ok = ok && rep.passed();
    out << std::left << std::setw(14) << rep.kind << std::right << std::scientific
        << std::setprecision(3) << std::setw(16) << rep.max_rel_error() << std::setw(12)
        << rep.tolerance << std::setw(10) << rep.skipped() << "  "
        << (rep.passed() ? "PASS" : "FAIL") << "\n";
    out.unsetf(std::ios::floatfield);
  }
  return ok ? kOk : kNumericFailure;
}

// Entry point shared by the executable and the tests. args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Human activity recognition with single- and multi-head CNN-LSTM models", "har"};
  app.require_subcommand(1);

  InspectOptions inspect;
  auto* data_cmd = app.add_subcommand("data", "dataset utilities");
  data_cmd->require_subcommand(1);
  auto* inspect_cmd = data_cmd->add_subcommand("inspect", "split summary and per-channel histograms");
  inspect_cmd->add_option("--data-dir", inspect.data_dir, "dataset root (default: $HAR_DATA_DIR)");
  inspect_cmd->add_option("--bins", inspect.bins, "histogram bins (>= 2)");
  inspect_cmd->add_option("--out", inspect.out_dir, "directory for histogram CSVs");
  inspect_cmd->add_flag("--raw", inspect.raw, "histogram raw instead of standardized signals");

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "train a CNN-LSTM classifier");
  train_cmd->add_option("--data-dir", tr.data_dir, "dataset root (default: $HAR_DATA_DIR)");
  train_cmd->add_option("--arch", tr.arch, "single|multi")->check(CLI::IsMember({"single", "multi"}));
  train_cmd->add_option("--epochs", tr.epochs, "training epochs");
  train_cmd->add_option("--batch", tr.batch, "mini-batch size");
  train_cmd->add_option("--lr", tr.lr, "Adam learning rate");
  train_cmd->add_option("--beta1", tr.beta1, "Adam first-moment decay");
  train_cmd->add_option("--beta2", tr.beta2, "Adam second-moment decay");
  train_cmd->add_option("--seed", tr.seed, "RNG seed for init, shuffling and dropout");
  train_cmd->add_option("--checkpoint-out", tr.checkpoint_out, "checkpoint JSON path");
  train_cmd->add_option("--history-out", tr.history_out, "per-epoch history CSV path");
  train_cmd->add_option("--train-subset", tr.train_subset, "train on a seeded subset of N windows");
  train_cmd->add_flag("--filters-reversed", tr.filters_reversed, "conv filters 32,64,128,512");
  train_cmd->add_flag("--quiet", tr.quiet, "only print the final accuracy");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  eval_cmd->add_option("--data-dir", ev.data_dir, "dataset root (default: $HAR_DATA_DIR)");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint JSON")->required();
  eval_cmd->add_option("--arch", ev.arch, "expected architecture")->check(CLI::IsMember({"single", "multi"}));
  eval_cmd->add_option("--report-out", ev.report_out, "classification report JSON path");
  eval_cmd->add_option("--confusion-out", ev.confusion_out, "confusion matrix CSV path");

  KnnOptions kn;
  auto* knn_cmd = app.add_subcommand("knn", "k-nearest-neighbour baseline on engineered features");
  knn_cmd->add_option("--data-dir", kn.data_dir, "dataset root (default: $HAR_DATA_DIR)");
  knn_cmd->add_option("--k", kn.k, "neighbours");
  knn_cmd->add_option("--sweep", kn.sweep, "error curve over LO:HI instead of a single report");
  knn_cmd->add_option("--sweep-out", kn.sweep_out, "sweep CSV path (default: stdout)");
  knn_cmd->add_option("--report-out", kn.report_out, "classification report JSON path");
  knn_cmd->add_option("--confusion-out", kn.confusion_out, "confusion matrix CSV path");

  GradcheckOptions gc;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of every backward pass");
  grad_cmd->add_option("--seed", gc.seed, "seed for the random test instances");

  std::vector<std::string> argv_store{"har"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (inspect_cmd->parsed()) return data_inspect(inspect, out, err);
    if (train_cmd->parsed()) return train_command(tr, out, err);
    if (eval_cmd->parsed()) return eval_command(ev, out, err);
    if (knn_cmd->parsed()) return knn_command(kn, out, err);
    if (grad_cmd->parsed()) return gradcheck_command(gc, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace har::cli
