#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tscmrar/casas.hpp"
#include "tscmrar/model.hpp"
#include "tscmrar/windowing.hpp"

namespace tscmrar {

// Rows are the true class, columns the predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);
  ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> counts);

  void add(std::size_t truth, std::size_t predicted);
  void merge(const ConfusionMatrix& other);

  std::size_t classes() const { return classes_; }
  std::uint64_t count(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * classes_ + predicted];
  }
  std::uint64_t total() const;
  std::uint64_t trace() const;

  double accuracy() const;
  // Zero-denominator precision/recall/F1 are 0.
  double precision(std::size_t cls) const;
  double recall(std::size_t cls) const;
  double f1(std::size_t cls) const;
  double macro_precision() const;
  double macro_recall() const;
  double macro_f1() const;

  void write_csv(std::ostream& out) const;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

struct ResidentMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro over residents
  double f1 = 0.0;         // macro over residents
  std::vector<double> class_precision;
  std::vector<double> class_recall;
  std::vector<double> class_f1;
};

struct EvaluationReport {
  ResidentMetrics resident;
  double activity_accuracy = 0.0;
  ConfusionMatrix resident_matrix{2};
  ConfusionMatrix activity_matrix{15};
  std::size_t windows = 0;
  // Precision/recall cells whose denominator was zero.
  std::vector<std::string> warnings;
};

EvaluationReport report_from_matrices(ConfusionMatrix resident, ConfusionMatrix activity);

// Accumulates truth/prediction pairs. Throws DataError when empty.
EvaluationReport evaluate_labels(std::span<const LabelPair> truth,
                                 std::span<const LabelPair> predicted,
                                 const LabelSpace& labels = {});
EvaluationReport evaluate(std::span<const SampleWindow> windows, const ModelParams& params);

// Header "method,windows,resident_accuracy,resident_precision,resident_f1,
// activity_accuracy" followed by per-resident precision/recall/F1 columns
// (resident<i>_precision, ...). The first four metric columns are the
// headline numbers.
void write_metrics_csv_header(std::ostream& out, std::size_t residents);
void write_metrics_csv_row(std::ostream& out, const std::string& method,
                           const EvaluationReport& report);
void write_metrics_report(std::ostream& out, const std::string& method,
                          const EvaluationReport& report);

}  // namespace tscmrar
