// Copyright 2026 The popprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POPPREP_EVALUATION_HPP_
#define POPPREP_EVALUATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "popprep/labels.hpp"
#include "popprep/tcn.hpp"

namespace popprep {

// Fraction of items with |y - y_hat| / y <= epsilon (boundary counts as
// correct).
double r_acc(std::span<const double> y, std::span<const double> y_hat, double epsilon = 0.3);

struct ClassificationMetrics {
  double accuracy = 0;  // C-Acc
  double f1 = 0;
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Predicted positive iff p >= threshold. F1 is 0 when there are no true
// positives.
ClassificationMetrics classification_metrics(std::span<const double> y,
                                             std::span<const double> p,
                                             double threshold = 0.5);

struct EvalResult {
  std::string task;
  std::string regime;
  LabelKind kind = LabelKind::kRegression;
  std::map<std::string, double> metrics;  // MRSE, R-Acc | C-Acc, F1
  std::size_t n_examples = 0;
  std::uint64_t seed = 0;
  // Dumped (label, prediction) pairs in example order.
  std::vector<double> labels;
  std::vector<double> predictions;
};

// Eval-mode forward over `test` and the metrics for the task's label kind.
EvalResult evaluate(const ModelParams& params, const TaskSpec& task,
                    const std::vector<LabeledExample>& test, const std::string& regime = "",
                    std::uint64_t seed = 0);

struct RegressionMetrics {
  double mrse = 0;
  double r_acc = 0;
};
// Throws ValidationError for a classification result.
RegressionMetrics regression_metrics(const EvalResult& r);
ClassificationMetrics classification_metrics(const EvalResult& r);

// Rows keyed by regime, columns by task, in insertion order.
class ResultsTable {
 public:
  void add(const EvalResult& r);
  const std::vector<EvalResult>& results() const { return results_; }
  // Long form: task,regime,metric,value,n_examples,seed
  void write_csv(std::ostream& out) const;
  static void write_csv_header(std::ostream& out);
  static void write_csv_rows(const EvalResult& r, std::ostream& out);
  // Wide aligned text: one row per regime, MRSE/R-Acc or C-Acc/F1 per task.
  std::string render_text() const;

 private:
  std::vector<EvalResult> results_;
};

}  // namespace popprep

#endif  // POPPREP_EVALUATION_HPP_
