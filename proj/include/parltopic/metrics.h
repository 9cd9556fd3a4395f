/*
 * Copyright 2026 The parltopic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Agreement and classification metrics.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parltopic/capschema.h"

namespace parltopic::metrics {

/// Nominal reliability data: units[u][c] is coder c's category for unit u,
/// or nullopt when the coder did not code the unit.
struct ReliabilityData {
  std::vector<std::string> coders;
  std::vector<std::vector<std::optional<int>>> units;
};

struct AlphaResult {
  double alpha = 1.0;
  /// Every pairable value was the same category, so expected disagreement
  /// is zero; alpha is reported as 1.0 by convention.
  bool no_variation = false;
  std::size_t pairable_units = 0;
  /// Number of pairable values (n in the coincidence matrix).
  std::size_t pairable_values = 0;
};

/// Krippendorff's alpha for nominal data with missing values, from the
/// coincidence matrix: units with fewer than two values are skipped and
/// each unit of m values adds every ordered value pair with weight
/// 1/(m-1). alpha = 1 - D_o/D_e.
///
/// Throws InsufficientData when no unit has two values.
AlphaResult krippendorff_alpha_nominal(const ReliabilityData& data);

/// annotator id -> (unit id -> label)
using AnnotationTable = std::map<std::string, std::map<std::string, capschema::AnnotatorLabel>>;

struct PairAgreement {
  std::string first;
  std::string second;
  std::size_t shared_units = 0;
  std::optional<AlphaResult> result;  // empty on InsufficientData
  std::string error;
};

/// Alpha for every annotator pair over the units both labeled, treating
/// do-not-know as its own category. Sorted by alpha descending; pairs with
/// insufficient data come last. Throws InsufficientData for < 2 annotators.
std::vector<PairAgreement> pairwise_agreement(const AnnotationTable& annotations);

/// Rows are gold labels, columns predictions. With `mix_column`, a final
/// column counts Mix predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix(std::vector<capschema::CapLabel> labels, bool mix_column);

  const std::vector<capschema::CapLabel>& labels() const { return labels_; }
  bool has_mix_column() const { return mix_column_; }
  std::size_t rows() const { return labels_.size(); }
  std::size_t cols() const { return labels_.size() + (mix_column_ ? 1 : 0); }

  std::size_t at(std::size_t row, std::size_t col) const { return counts_[row * cols() + col]; }
  std::size_t& at(std::size_t row, std::size_t col) { return counts_[row * cols() + col]; }
  std::size_t total() const;
  std::size_t row_sum(std::size_t row) const;
  std::size_t col_sum(std::size_t col) const;

  /// TSV with a header of predicted codes (and MIX), one row per gold code.
  std::string to_tsv() const;

 private:
  std::vector<capschema::CapLabel> labels_;
  bool mix_column_;
  std::vector<std::size_t> counts_;
};

/// Throws LengthMismatch, or UnknownLabel for a label outside `labels` (or
/// a Mix prediction without `mix_column`). OpenMP-parallel.
ConfusionMatrix confusion(std::span<const capschema::CapLabel> gold,
                          std::span<const capschema::FinalLabel> pred,
                          const std::vector<capschema::CapLabel>& labels,
                          bool mix_column = false);

namespace serial {
ConfusionMatrix confusion(std::span<const capschema::CapLabel> gold,
                          std::span<const capschema::FinalLabel> pred,
                          const std::vector<capschema::CapLabel>& labels,
                          bool mix_column = false);
}  // namespace serial

struct LabelScore {
  capschema::CapLabel label{capschema::kOtherCode};
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct EvalReport {
  std::vector<LabelScore> per_label;
  double macro_f1 = 0;
  double micro_f1 = 0;
  double accuracy = 0;
  std::size_t n = 0;
};

/// Per-label F1 = 2TP / (2TP + FP + FN), 0 when the denominator is 0.
/// Macro-F1 averages over every label in the matrix, including labels with
/// no support. Mix predictions count as misses for their gold label.
/// Throws EmptyMatrix.
EvalReport f1_from_confusion(const ConfusionMatrix& cm);

struct RunAggregate {
  double mean = 0;
  /// Sample standard deviation; 0 for a single run.
  double sd = 0;
  std::size_t runs = 0;

  /// "0.72±0.01"
  std::string render(int decimals = 2) const;
};

/// Precondition: at least one value.
RunAggregate aggregate_runs(std::span<const double> values);

}  // namespace parltopic::metrics
