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

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "parltopic/assembly.h"
#include "parltopic/capschema.h"
#include "parltopic/corpus.h"

namespace parltopic::analysis {

struct AnalysisFilter {
  int year_min = 2017;
  int year_max = 2022;
  std::set<corpus::Role> drop_roles{corpus::Role::chairperson};
  bool drop_other = true;
  bool drop_mix = true;

  /// Throws ValidationError when year_min > year_max.
  void validate() const;
  bool keep(const assembly::EnrichedSpeech& s) const;
  nlohmann::json to_json() const;
};

struct FilterStats {
  std::size_t seen = 0;
  std::size_t kept = 0;
  std::size_t dropped_year = 0;
  std::size_t dropped_role = 0;
  std::size_t dropped_topic = 0;
};

std::vector<assembly::EnrichedSpeech> filter_rows(std::span<const assembly::EnrichedSpeech> rows,
                                                  const AnalysisFilter& filter,
                                                  FilterStats* stats = nullptr);

/// Streaming per-(parliament, topic, gender) counters. Rows are filtered
/// on the way in; every parliament seen is registered even when all its
/// rows are dropped, so empty parliaments can be reported.
class Accumulator {
 public:
  explicit Accumulator(AnalysisFilter filter = {},
                       const capschema::Schema& schema = capschema::Schema::builtin());

  void add(const assembly::EnrichedSpeech& s);
  /// Combines counters from another shard with the same filter and schema.
  void merge(const Accumulator& other);

  struct Cell {
    std::uint64_t total = 0;
    std::uint64_t female = 0;
    std::uint64_t male = 0;
    double sentiment_sum = 0.0;
    std::uint64_t sentiment_n = 0;
  };
  struct Row {
    std::vector<Cell> cells;  // indexed like policy_labels()
    std::uint64_t total = 0;
    std::uint64_t female = 0;
    std::uint64_t male = 0;
    std::uint64_t unknown_gender = 0;
    std::uint64_t missing_sentiment = 0;
  };

  const std::map<std::string, Row>& rows() const { return rows_; }
  const std::vector<capschema::CapLabel>& policy_labels() const { return labels_; }
  const FilterStats& filter_stats() const { return stats_; }
  const AnalysisFilter& filter() const { return filter_; }

 private:
  AnalysisFilter filter_;
  const capschema::Schema* schema_;
  std::vector<capschema::CapLabel> labels_;
  std::vector<int> column_of_code_;
  std::map<std::string, Row> rows_;
  FilterStats stats_;
};

/// Accumulates in fixed-size shards merged in input order, so the result
/// does not depend on the thread count. OpenMP-parallel across shards.
Accumulator accumulate(std::span<const assembly::EnrichedSpeech> rows, const AnalysisFilter& filter,
                       const capschema::Schema& schema = capschema::Schema::builtin());
namespace serial {
Accumulator accumulate(std::span<const assembly::EnrichedSpeech> rows, const AnalysisFilter& filter,
                       const capschema::Schema& schema = capschema::Schema::builtin());
}  // namespace serial

struct OmittedRow {
  std::string parliament;
  std::string reason;  // "EmptyParliament" or "MissingGenderData"
};

/// Parliament rows by policy-label columns. Empty cells are nullopt and
/// are written as NA.
struct TopicMatrix {
  std::string metric;
  std::vector<std::string> rows;
  std::vector<capschema::CapLabel> cols;
  std::vector<std::vector<std::optional<double>>> values;
  std::vector<OmittedRow> omitted;

  void write_tsv(std::ostream& out) const;
  nlohmann::json summary(const Accumulator& acc) const;
};

/// Row p, column t: share of parliament p's kept speeches with topic t.
TopicMatrix topic_distribution(const Accumulator& acc);
/// Mean speech-level sentiment per (parliament, topic).
TopicMatrix sentiment_by_topic(const Accumulator& acc);
/// Female minus male topic distribution per parliament.
TopicMatrix gender_topic_difference(const Accumulator& acc);

enum class Metric { topics, sentiment, gender };
std::optional<Metric> parse_metric(std::string_view s);
TopicMatrix compute(Metric metric, const Accumulator& acc);

}  // namespace parltopic::analysis
