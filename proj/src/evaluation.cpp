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

#include "popprep/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "popprep/errors.hpp"
#include "popprep/losses.hpp"
#include "popprep/training.hpp"

namespace popprep {

double r_acc(std::span<const double> y, std::span<const double> y_hat, double epsilon) {
  if (y.empty()) throw ValidationError("R-Acc over an empty set");
  if (y.size() != y_hat.size()) throw ValidationError("R-Acc inputs differ in length");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0)) throw ValidationError("R-Acc needs positive targets");
    if (std::abs(y[i] - y_hat[i]) / y[i] <= epsilon) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

ClassificationMetrics classification_metrics(std::span<const double> y,
                                             std::span<const double> p, double threshold) {
  if (y.empty()) throw ValidationError("classification metrics over an empty set");
  if (y.size() != p.size()) throw ValidationError("classification inputs differ in length");
  ClassificationMetrics m;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool pred = p[i] >= threshold;
    const bool truth = y[i] >= 0.5;
    if (pred && truth) ++m.tp;
    else if (pred) ++m.fp;
    else if (truth) ++m.fn;
    else ++m.tn;
  }
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(y.size());
  m.f1 = m.tp == 0 ? 0.0
                   : 2.0 * static_cast<double>(m.tp) /
                         static_cast<double>(2 * m.tp + m.fp + m.fn);
  return m;
}

EvalResult evaluate(const ModelParams& params, const TaskSpec& task,
                    const std::vector<LabeledExample>& test, const std::string& regime,
                    std::uint64_t seed) {
  if (test.empty()) throw ValidationError(task.name + ": empty test set");
  const std::int64_t window = task.observation_seconds / test.front().dynamics.unit_seconds;
  for (const auto& ex : test) {
    if (static_cast<std::int64_t>(ex.dynamics.values.size()) != window) {
      throw ValidationError(task.name + ": example " + ex.cascade_id +
                            " does not cover the task observation window");
    }
  }
  if (params.config().receptive_field() < window) {
    throw ValidationError(task.name + ": checkpoint receptive field " +
                          std::to_string(params.config().receptive_field()) +
                          " shorter than the task window of " + std::to_string(window) +
                          " units");
  }

  EvalResult r;
  r.task = task.name;
  r.regime = regime;
  r.kind = task.label_kind;
  r.seed = seed;
  r.n_examples = test.size();
  r.predictions = predict_examples(params, task.label_kind, test);
  for (const auto& ex : test) r.labels.push_back(ex.label);
  if (task.label_kind == LabelKind::kRegression) {
    r.metrics["MRSE"] = mrse_loss(r.labels, r.predictions);
    r.metrics["R-Acc"] = r_acc(r.labels, r.predictions);
  } else {
    const auto m = classification_metrics(std::span<const double>(r.labels),
                                          std::span<const double>(r.predictions));
    r.metrics["C-Acc"] = m.accuracy;
    r.metrics["F1"] = m.f1;
  }
  return r;
}

RegressionMetrics regression_metrics(const EvalResult& r) {
  if (r.kind != LabelKind::kRegression) {
    throw ValidationError("regression metrics requested for classification task " + r.task);
  }
  return {mrse_loss(r.labels, r.predictions), r_acc(r.labels, r.predictions)};
}

ClassificationMetrics classification_metrics(const EvalResult& r) {
  if (r.kind != LabelKind::kClassification) {
    throw ValidationError("classification metrics requested for regression task " + r.task);
  }
  return classification_metrics(std::span<const double>(r.labels),
                                std::span<const double>(r.predictions));
}

void ResultsTable::add(const EvalResult& r) { results_.push_back(r); }

void ResultsTable::write_csv_header(std::ostream& out) {
  out << "task,regime,metric,value,n_examples,seed\n";
}

void ResultsTable::write_csv_rows(const EvalResult& r, std::ostream& out) {
  const auto old = out.precision(17);
  const char* order[2][2] = {{"MRSE", "R-Acc"}, {"C-Acc", "F1"}};
  for (const char* name : order[r.kind == LabelKind::kRegression ? 0 : 1]) {
    const auto it = r.metrics.find(name);
    if (it == r.metrics.end()) continue;
    out << r.task << ',' << r.regime << ',' << name << ',' << it->second << ','
        << r.n_examples << ',' << r.seed << '\n';
  }
  out.precision(old);
}

void ResultsTable::write_csv(std::ostream& out) const {
  write_csv_header(out);
  for (const auto& r : results_) write_csv_rows(r, out);
}

std::string ResultsTable::render_text() const {
  std::vector<std::string> tasks, regimes;
  std::map<std::string, LabelKind> kinds;
  for (const auto& r : results_) {
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
    if (std::find(regimes.begin(), regimes.end(), r.regime) == regimes.end()) {
      regimes.push_back(r.regime);
    }
    kinds[r.task] = r.kind;
  }
  std::ostringstream os;
  os << std::left << std::setw(12) << "Methods";
  for (const auto& t : tasks) {
    const bool reg = kinds[t] == LabelKind::kRegression;
    os << " | " << std::setw(8) << (t + (reg ? " MRSE" : " C-Acc")) << ' '
       << std::setw(8) << (reg ? "R-Acc" : "F1");
  }
  os << '\n';
  for (const auto& g : regimes) {
    os << std::left << std::setw(12) << g;
    for (const auto& t : tasks) {
      const auto it = std::find_if(results_.begin(), results_.end(), [&](const EvalResult& r) {
        return r.task == t && r.regime == g;
      });
      os << " | ";
      if (it == results_.end()) {
        os << std::setw(8) << "-" << ' ' << std::setw(8) << "-";
        continue;
      }
      std::ostringstream a, b;
      a << std::fixed;
      b << std::fixed;
      if (it->kind == LabelKind::kRegression) {
        a << std::setprecision(3) << it->metrics.at("MRSE");
        b << std::setprecision(1) << 100.0 * it->metrics.at("R-Acc") << '%';
      } else {
        a << std::setprecision(1) << 100.0 * it->metrics.at("C-Acc") << '%';
        b << std::setprecision(3) << it->metrics.at("F1");
      }
      os << std::setw(8) << a.str() << ' ' << std::setw(8) << b.str();
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace popprep
