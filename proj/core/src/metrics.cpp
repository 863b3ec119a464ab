#include "tscmrar/metrics.hpp"

#include <iomanip>
#include <numeric>
#include <ostream>

#include "tscmrar/error.hpp"

namespace tscmrar {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw DataError("confusion matrix needs at least one class");
}

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> counts)
    : classes_(classes), counts_(std::move(counts)) {
  if (classes == 0 || counts_.size() != classes * classes) {
    throw DataError("confusion matrix counts do not form a square matrix");
  }
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= classes_ || predicted >= classes_) {
    throw DataError("confusion matrix: class index out of range");
  }
  ++counts_[truth * classes_ + predicted];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw DataError("confusion matrix: size mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < classes_; ++i) t += count(i, i);
  return t;
}

double ConfusionMatrix::accuracy() const { return ratio(trace(), total()); }

double ConfusionMatrix::precision(std::size_t cls) const {
  std::uint64_t column = 0;
  for (std::size_t r = 0; r < classes_; ++r) column += count(r, cls);
  return ratio(count(cls, cls), column);
}

double ConfusionMatrix::recall(std::size_t cls) const {
  std::uint64_t row = 0;
  for (std::size_t c = 0; c < classes_; ++c) row += count(cls, c);
  return ratio(count(cls, cls), row);
}

double ConfusionMatrix::f1(std::size_t cls) const {
  const double p = precision(cls);
  const double r = recall(cls);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double ConfusionMatrix::macro_precision() const {
  double s = 0.0;
  for (std::size_t c = 0; c < classes_; ++c) s += precision(c);
  return s / static_cast<double>(classes_);
}

double ConfusionMatrix::macro_recall() const {
  double s = 0.0;
  for (std::size_t c = 0; c < classes_; ++c) s += recall(c);
  return s / static_cast<double>(classes_);
}

double ConfusionMatrix::macro_f1() const {
  double s = 0.0;
  for (std::size_t c = 0; c < classes_; ++c) s += f1(c);
  return s / static_cast<double>(classes_);
}

void ConfusionMatrix::write_csv(std::ostream& out) const {
  out << "truth\\predicted";
  for (std::size_t c = 0; c < classes_; ++c) out << ',' << c + 1;
  out << '\n';
  for (std::size_t r = 0; r < classes_; ++r) {
    out << r + 1;
    for (std::size_t c = 0; c < classes_; ++c) out << ',' << count(r, c);
    out << '\n';
  }
}

EvaluationReport report_from_matrices(ConfusionMatrix resident, ConfusionMatrix activity) {
  EvaluationReport report;
  report.windows = static_cast<std::size_t>(resident.total());
  if (activity.total() != resident.total()) {
    throw DataError("resident and activity matrices count different windows");
  }
  report.resident.accuracy = resident.accuracy();
  report.resident.precision = resident.macro_precision();
  report.resident.f1 = resident.macro_f1();
  for (std::size_t c = 0; c < resident.classes(); ++c) {
    report.resident.class_precision.push_back(resident.precision(c));
    report.resident.class_recall.push_back(resident.recall(c));
    report.resident.class_f1.push_back(resident.f1(c));
    std::uint64_t column = 0, row = 0;
    for (std::size_t o = 0; o < resident.classes(); ++o) {
      column += resident.count(o, c);
      row += resident.count(c, o);
    }
    if (column == 0) {
      report.warnings.push_back("resident " + std::to_string(c + 1) +
                                " never predicted; precision set to 0");
    }
    if (row == 0) {
      report.warnings.push_back("resident " + std::to_string(c + 1) +
                                " absent from test set; recall set to 0");
    }
  }
  report.activity_accuracy = activity.accuracy();
  report.resident_matrix = std::move(resident);
  report.activity_matrix = std::move(activity);
  return report;
}

EvaluationReport evaluate_labels(std::span<const LabelPair> truth,
                                 std::span<const LabelPair> predicted,
                                 const LabelSpace& labels) {
  if (truth.empty()) throw DataError("evaluate: test set is empty");
  if (truth.size() != predicted.size()) {
    throw DataError("evaluate: truth and prediction counts differ");
  }
  ConfusionMatrix resident(labels.residents);
  ConfusionMatrix activity(labels.activities);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    resident.add(truth[i].resident, predicted[i].resident);
    activity.add(truth[i].activity, predicted[i].activity);
  }
  return report_from_matrices(std::move(resident), std::move(activity));
}

EvaluationReport evaluate(std::span<const SampleWindow> windows, const ModelParams& params) {
  if (windows.empty()) throw DataError("evaluate: test set is empty");
  std::vector<LabelPair> truth, predicted;
  truth.reserve(windows.size());
  predicted.reserve(windows.size());
  for (const auto& w : windows) {
    truth.push_back(w.label);
    predicted.push_back(predict(w, params).label());
  }
  return evaluate_labels(truth, predicted, params.labels());
}

void write_metrics_csv_header(std::ostream& out, std::size_t residents) {
  out << "method,windows,resident_accuracy,resident_precision,resident_f1,activity_accuracy";
  for (std::size_t c = 1; c <= residents; ++c) {
    out << ",resident" << c << "_precision,resident" << c << "_recall,resident" << c
        << "_f1";
  }
  out << '\n';
}

void write_metrics_csv_row(std::ostream& out, const std::string& method,
                           const EvaluationReport& report) {
  const auto old = out.precision(17);
  out << method << ',' << report.windows << ',' << report.resident.accuracy << ','
      << report.resident.precision << ',' << report.resident.f1 << ','
      << report.activity_accuracy;
  for (std::size_t c = 0; c < report.resident.class_f1.size(); ++c) {
    out << ',' << report.resident.class_precision[c] << ','
        << report.resident.class_recall[c] << ',' << report.resident.class_f1[c];
  }
  out << '\n';
  out.precision(old);
}

void write_metrics_report(std::ostream& out, const std::string& method,
                          const EvaluationReport& report) {
  out << std::fixed << std::setprecision(4);
  out << method << " on " << report.windows << " windows\n"
      << "  resident accuracy   " << report.resident.accuracy << '\n'
      << "  resident precision  " << report.resident.precision << "  (macro)\n"
      << "  resident F1         " << report.resident.f1 << "  (macro)\n"
      << "  activity accuracy   " << report.activity_accuracy << '\n';
  for (std::size_t c = 0; c < report.resident.class_f1.size(); ++c) {
    out << "  resident " << c + 1 << " as positive: precision "
        << report.resident.class_precision[c] << ", recall "
        << report.resident.class_recall[c] << ", F1 " << report.resident.class_f1[c]
        << '\n';
  }
  for (const auto& w : report.warnings) out << "  warning: " << w << '\n';
  out << std::defaultfloat;
}

}  // namespace tscmrar
