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

// Reference computations written directly from the definitions, with no
// shared code and no attempt at efficiency. Library results are checked
// against these.

#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace parltopic::oracle {

struct Alpha {
  double alpha = 1.0;
  bool no_variation = false;
  bool insufficient = false;
};

/// Nominal alpha by explicit enumeration of ordered value pairs inside each
/// unit. The pair (i, j), i != j, of a unit with m values adds 1/(m-1) to
/// the coincidence cell (v_i, v_j).
inline Alpha krippendorff_alpha(const std::vector<std::vector<std::optional<int>>>& units) {
  std::map<std::pair<int, int>, double> o;
  for (const auto& unit : units) {
    std::vector<int> values;
    for (const auto& v : unit) {
      if (v) values.push_back(*v);
    }
    const std::size_t m = values.size();
    if (m < 2) continue;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        o[{values[i], values[j]}] += 1.0 / static_cast<double>(m - 1);
      }
    }
  }
  Alpha out;
  if (o.empty()) {
    out.insufficient = true;
    return out;
  }
  std::map<int, double> marginal;
  double n = 0.0;
  double disagree = 0.0;
  for (const auto& [cell, w] : o) {
    marginal[cell.first] += w;
    n += w;
    if (cell.first != cell.second) disagree += w;
  }
  double expected = 0.0;
  for (const auto& [c, nc] : marginal) {
    for (const auto& [k, nk] : marginal) {
      if (c != k) expected += nc * nk;
    }
  }
  if (expected == 0.0) {
    out.no_variation = true;
    out.alpha = 1.0;
    return out;
  }
  const double d_o = disagree / n;
  const double d_e = expected / (n * (n - 1.0));
  out.alpha = 1.0 - d_o / d_e;
  return out;
}

struct F1 {
  std::vector<double> per_label;
  double macro = 0.0;
  double micro = 0.0;
  double accuracy = 0.0;
};

/// Per-label, macro and micro F1 recounted item by item. `pred` uses -1 for
/// Mix, which is a miss for the gold label and a false positive for none.
inline F1 f1_items(const std::vector<int>& gold, const std::vector<int>& pred,
                   const std::vector<int>& labels) {
  F1 out;
  std::size_t tp_sum = 0, fp_sum = 0, fn_sum = 0, correct = 0;
  for (int label : labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool g = gold[i] == label;
      const bool p = pred[i] == label;
      if (g && p) ++tp;
      if (!g && p) ++fp;
      if (g && !p) ++fn;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    out.per_label.push_back(denom == 0 ? 0.0 : 2.0 * tp / denom);
    tp_sum += tp;
    fp_sum += fp;
    fn_sum += fn;
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) ++correct;
  }
  double sum = 0.0;
  for (double f : out.per_label) sum += f;
  out.macro = labels.empty() ? 0.0 : sum / labels.size();
  const std::size_t micro_denom = 2 * tp_sum + fp_sum + fn_sum;
  out.micro = micro_denom == 0 ? 0.0 : 2.0 * tp_sum / micro_denom;
  out.accuracy = gold.empty() ? 0.0 : static_cast<double>(correct) / gold.size();
  return out;
}

/// Random reliability data: 2..5 coders, 4..30 units, up to 30% missing,
/// categories drawn from a small alphabet so that agreement varies.
inline std::vector<std::vector<std::optional<int>>> random_reliability(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> coders_d(2, 5), units_d(4, 30), cats_d(2, 6);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  const int coders = coders_d(gen);
  const int units = units_d(gen);
  const int cats = cats_d(gen);
  const double missing = 0.3 * unit01(gen);
  const double agree = unit01(gen);
  std::uniform_int_distribution<int> cat_d(0, cats - 1);
  std::vector<std::vector<std::optional<int>>> data(units);
  for (auto& unit : data) {
    const int truth = cat_d(gen);
    for (int c = 0; c < coders; ++c) {
      if (unit01(gen) < missing) {
        unit.push_back(std::nullopt);
      } else {
        unit.push_back(unit01(gen) < agree ? truth : cat_d(gen));
      }
    }
  }
  return data;
}

}  // namespace parltopic::oracle
