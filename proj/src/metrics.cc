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

#include "parltopic/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "parltopic/common.h"
#include "parltopic/tsv.h"

namespace parltopic::metrics {

using capschema::CapLabel;
using capschema::FinalLabel;

AlphaResult krippendorff_alpha_nominal(const ReliabilityData& data) {
  // Dense category ids in order of first appearance.
  std::unordered_map<int, std::size_t> dense;
  for (const auto& unit : data.units) {
    for (const auto& v : unit) {
      if (v) dense.emplace(*v, dense.size());
    }
  }
  const std::size_t k = dense.size();
  std::vector<double> coincidence(k * k, 0.0);
  std::vector<std::size_t> unit_counts(k);

  AlphaResult result;
  for (const auto& unit : data.units) {
    std::fill(unit_counts.begin(), unit_counts.end(), 0);
    std::size_t m = 0;
    for (const auto& v : unit) {
      if (v) {
        ++unit_counts[dense[*v]];
        ++m;
      }
    }
    if (m < 2) continue;
    ++result.pairable_units;
    result.pairable_values += m;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t c = 0; c < k; ++c) {
      if (!unit_counts[c]) continue;
      for (std::size_t d = 0; d < k; ++d) {
        if (!unit_counts[d]) continue;
        const double pairs = c == d ? static_cast<double>(unit_counts[c]) * (unit_counts[c] - 1)
                                    : static_cast<double>(unit_counts[c]) * unit_counts[d];
        coincidence[c * k + d] += pairs * w;
      }
    }
  }
  if (result.pairable_units == 0) {
    throw InsufficientData("no unit has two or more values");
  }

  const double n = static_cast<double>(result.pairable_values);
  std::vector<double> marginal(k, 0.0);
  double observed_disagreement = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) {
      marginal[c] += coincidence[c * k + d];
      if (c != d) observed_disagreement += coincidence[c * k + d];
    }
  }
  double expected_disagreement = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) {
      if (c != d) expected_disagreement += marginal[c] * marginal[d];
    }
  }
  const double d_o = observed_disagreement / n;
  const double d_e = expected_disagreement / (n * (n - 1.0));
  if (d_e == 0.0) {
    result.no_variation = true;
    result.alpha = 1.0;
    return result;
  }
  result.alpha = 1.0 - d_o / d_e;
  return result;
}

std::vector<PairAgreement> pairwise_agreement(const AnnotationTable& annotations) {
  if (annotations.size() < 2) throw InsufficientData("need at least two annotators");
  std::vector<PairAgreement> out;
  for (auto a = annotations.begin(); a != annotations.end(); ++a) {
    for (auto b = std::next(a); b != annotations.end(); ++b) {
      PairAgreement pair{a->first, b->first, 0, std::nullopt, {}};
      ReliabilityData data{{a->first, b->first}, {}};
      for (const auto& [unit, label] : a->second) {
        auto other = b->second.find(unit);
        if (other == b->second.end()) continue;
        data.units.push_back({label.category(), other->second.category()});
      }
      pair.shared_units = data.units.size();
      try {
        pair.result = krippendorff_alpha_nominal(data);
      } catch (const InsufficientData& e) {
        pair.error = e.what();
      }
      out.push_back(std::move(pair));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const PairAgreement& x, const PairAgreement& y) {
    if (x.result.has_value() != y.result.has_value()) return x.result.has_value();
    if (!x.result) return false;
    return x.result->alpha > y.result->alpha;
  });
  return out;
}

ConfusionMatrix::ConfusionMatrix(std::vector<CapLabel> labels, bool mix_column)
    : labels_(std::move(labels)), mix_column_(mix_column) {
  counts_.assign(rows() * cols(), 0);
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::row_sum(std::size_t row) const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < cols(); ++c) s += at(row, c);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t col) const {
  std::size_t s = 0;
  for (std::size_t r = 0; r < rows(); ++r) s += at(r, col);
  return s;
}

std::string ConfusionMatrix::to_tsv() const {
  std::vector<std::string> header{"gold/pred"};
  for (auto l : labels_) header.push_back(std::to_string(l.code()));
  if (mix_column_) header.emplace_back("MIX");
  std::string out = tsv::join_row(header);
  for (std::size_t r = 0; r < rows(); ++r) {
    std::vector<std::string> row{std::to_string(labels_[r].code())};
    for (std::size_t c = 0; c < cols(); ++c) row.push_back(std::to_string(at(r, c)));
    tsv::append_row(out, row);
  }
  return out;
}

namespace {

struct LabelIndex {
  explicit LabelIndex(const std::vector<CapLabel>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto code = static_cast<std::size_t>(labels[i].code());
      if (code >= slot.size()) slot.resize(code + 1, -1);
      slot[code] = static_cast<int>(i);
    }
  }
  int operator()(CapLabel l) const {
    auto code = static_cast<std::size_t>(l.code());
    return code < slot.size() ? slot[code] : -1;
  }
  std::vector<int> slot;
};

// Column of one item, or -1 when it is not countable.
inline int column_of(const FinalLabel& p, const LabelIndex& index, std::size_t mix_col,
                     bool mix_column) {
  if (p.is_mix()) return mix_column ? static_cast<int>(mix_col) : -1;
  return index(p.cap());
}

[[noreturn]] void throw_unknown(std::size_t item) {
  throw UnknownLabel("item " + std::to_string(item) +
                     ": label outside the configured list (or Mix without a Mix column)");
}

}  // namespace

ConfusionMatrix confusion(std::span<const CapLabel> gold, std::span<const FinalLabel> pred,
                          const std::vector<CapLabel>& labels, bool mix_column) {
  if (gold.size() != pred.size()) throw LengthMismatch(gold.size(), pred.size());
  ConfusionMatrix cm(labels, mix_column);
  const LabelIndex index(labels);
  const std::size_t cols = cm.cols();
  const std::size_t cells = cm.rows() * cols;
  const auto n = static_cast<std::ptrdiff_t>(gold.size());
  std::vector<std::size_t> counts(cells, 0);
  std::ptrdiff_t first_bad = n;

#pragma omp parallel
  {
    std::vector<std::size_t> local(cells, 0);
    std::ptrdiff_t local_bad = n;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      int r = index(gold[i]);
      int c = column_of(pred[i], index, labels.size(), mix_column);
      if (r < 0 || c < 0) {
        local_bad = std::min(local_bad, i);
        continue;
      }
      ++local[static_cast<std::size_t>(r) * cols + c];
    }
#pragma omp critical
    {
      for (std::size_t j = 0; j < cells; ++j) counts[j] += local[j];
      first_bad = std::min(first_bad, local_bad);
    }
  }
  if (first_bad < n) throw_unknown(static_cast<std::size_t>(first_bad));
  for (std::size_t r = 0; r < cm.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) cm.at(r, c) = counts[r * cols + c];
  }
  return cm;
}

namespace serial {

ConfusionMatrix confusion(std::span<const CapLabel> gold, std::span<const FinalLabel> pred,
                          const std::vector<CapLabel>& labels, bool mix_column) {
  if (gold.size() != pred.size()) throw LengthMismatch(gold.size(), pred.size());
  ConfusionMatrix cm(labels, mix_column);
  const LabelIndex index(labels);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    int r = index(gold[i]);
    int c = column_of(pred[i], index, labels.size(), mix_column);
    if (r < 0 || c < 0) throw_unknown(i);
    ++cm.at(r, c);
  }
  return cm;
}

}  // namespace serial

EvalReport f1_from_confusion(const ConfusionMatrix& cm) {
  EvalReport report;
  report.n = cm.total();
  if (report.n == 0) throw EmptyMatrix();
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  double f1_sum = 0;
  for (std::size_t i = 0; i < cm.rows(); ++i) {
    const std::size_t tp = cm.at(i, i);
    const std::size_t fp = cm.col_sum(i) - tp;
    const std::size_t fn = cm.row_sum(i) - tp;
    LabelScore s;
    s.label = cm.labels()[i];
    s.support = cm.row_sum(i);
    s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const std::size_t denom = 2 * tp + fp + fn;
    s.f1 = denom ? static_cast<double>(2 * tp) / static_cast<double>(denom) : 0.0;
    f1_sum += s.f1;
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
    report.per_label.push_back(s);
  }
  report.macro_f1 = cm.rows() ? f1_sum / static_cast<double>(cm.rows()) : 0.0;
  const std::size_t micro_denom = 2 * tp_all + fp_all + fn_all;
  report.micro_f1 =
      micro_denom ? static_cast<double>(2 * tp_all) / static_cast<double>(micro_denom) : 0.0;
  report.accuracy = static_cast<double>(tp_all) / static_cast<double>(report.n);
  return report;
}

std::string RunAggregate::render(int decimals) const {
  return tsv::format_fixed(mean, decimals) + "±" + tsv::format_fixed(sd, decimals);
}

RunAggregate aggregate_runs(std::span<const double> values) {
  if (values.empty()) throw ValidationError("aggregate_runs needs at least one value");
  RunAggregate agg;
  agg.runs = values.size();
  agg.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
    agg.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return agg;
}

}  // namespace parltopic::metrics
