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

#include "parltopic/analysis.h"

#include <algorithm>

#include "parltopic/common.h"
#include "parltopic/tsv.h"

namespace parltopic::analysis {

using assembly::EnrichedSpeech;
using corpus::Gender;

void AnalysisFilter::validate() const {
  if (year_min > year_max) {
    throw ValidationError("analysis filter: year_min " + std::to_string(year_min) +
                          " exceeds year_max " + std::to_string(year_max));
  }
}

namespace {

enum class Verdict { keep, year, role, topic };

Verdict judge(const AnalysisFilter& f, const EnrichedSpeech& s) {
  const int year = s.speech.date.year;
  if (year < f.year_min || year > f.year_max) return Verdict::year;
  if (f.drop_roles.count(s.speech.speaker_role)) return Verdict::role;
  if (s.topic.is_mix()) return f.drop_mix ? Verdict::topic : Verdict::keep;
  if (f.drop_other && s.topic.cap().code() == capschema::kOtherCode) return Verdict::topic;
  return Verdict::keep;
}

void count(FilterStats& stats, Verdict v) {
  ++stats.seen;
  switch (v) {
    case Verdict::keep: ++stats.kept; break;
    case Verdict::year: ++stats.dropped_year; break;
    case Verdict::role: ++stats.dropped_role; break;
    case Verdict::topic: ++stats.dropped_topic; break;
  }
}

}  // namespace

bool AnalysisFilter::keep(const EnrichedSpeech& s) const { return judge(*this, s) == Verdict::keep; }

nlohmann::json AnalysisFilter::to_json() const {
  std::vector<std::string> roles;
  for (auto r : drop_roles) roles.emplace_back(corpus::to_string(r));
  return {{"year_min", year_min},
          {"year_max", year_max},
          {"drop_roles", roles},
          {"drop_other", drop_other},
          {"drop_mix", drop_mix}};
}

std::vector<EnrichedSpeech> filter_rows(std::span<const EnrichedSpeech> rows,
                                        const AnalysisFilter& filter, FilterStats* stats) {
  filter.validate();
  std::vector<EnrichedSpeech> out;
  FilterStats local;
  for (const auto& r : rows) {
    auto v = judge(filter, r);
    count(local, v);
    if (v == Verdict::keep) out.push_back(r);
  }
  if (stats) *stats = local;
  return out;
}

Accumulator::Accumulator(AnalysisFilter filter, const capschema::Schema& schema)
    : filter_(std::move(filter)), schema_(&schema), labels_(schema.policy_labels()) {
  filter_.validate();
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    auto code = static_cast<std::size_t>(labels_[i].code());
    if (code >= column_of_code_.size()) column_of_code_.resize(code + 1, -1);
    column_of_code_[code] = static_cast<int>(i);
  }
}

void Accumulator::add(const EnrichedSpeech& s) {
  auto [it, inserted] = rows_.try_emplace(s.speech.parliament);
  Row& row = it->second;
  if (inserted) row.cells.resize(labels_.size());
  auto v = judge(filter_, s);
  count(stats_, v);
  if (v != Verdict::keep) return;

  // With drop_mix/drop_other switched off, Mix and Other still have no
  // column in the policy-topic matrix, so they only count toward totals.
  Cell* cell = nullptr;
  if (!s.topic.is_mix()) {
    auto code = static_cast<std::size_t>(s.topic.cap().code());
    if (code < column_of_code_.size() && column_of_code_[code] >= 0) {
      cell = &row.cells[static_cast<std::size_t>(column_of_code_[code])];
    }
  }
  ++row.total;
  if (cell) ++cell->total;
  switch (s.speech.speaker_gender) {
    case Gender::female:
      ++row.female;
      if (cell) ++cell->female;
      break;
    case Gender::male:
      ++row.male;
      if (cell) ++cell->male;
      break;
    case Gender::unknown: ++row.unknown_gender; break;
  }
  if (s.sentiment_score_mean) {
    if (cell) {
      cell->sentiment_sum += *s.sentiment_score_mean;
      ++cell->sentiment_n;
    }
  } else {
    ++row.missing_sentiment;
  }
}

void Accumulator::merge(const Accumulator& other) {
  for (const auto& [parl, src] : other.rows_) {
    auto [it, inserted] = rows_.try_emplace(parl);
    Row& dst = it->second;
    if (inserted) dst.cells.resize(labels_.size());
    for (std::size_t i = 0; i < dst.cells.size(); ++i) {
      auto& d = dst.cells[i];
      const auto& s = src.cells[i];
      d.total += s.total;
      d.female += s.female;
      d.male += s.male;
      d.sentiment_sum += s.sentiment_sum;
      d.sentiment_n += s.sentiment_n;
    }
    dst.total += src.total;
    dst.female += src.female;
    dst.male += src.male;
    dst.unknown_gender += src.unknown_gender;
    dst.missing_sentiment += src.missing_sentiment;
  }
  stats_.seen += other.stats_.seen;
  stats_.kept += other.stats_.kept;
  stats_.dropped_year += other.stats_.dropped_year;
  stats_.dropped_role += other.stats_.dropped_role;
  stats_.dropped_topic += other.stats_.dropped_topic;
}

namespace {
constexpr std::size_t kShardRows = 8192;
}

Accumulator accumulate(std::span<const EnrichedSpeech> rows, const AnalysisFilter& filter,
                       const capschema::Schema& schema) {
  const std::size_t n_shards = (rows.size() + kShardRows - 1) / kShardRows;
  std::vector<Accumulator> shards(n_shards, Accumulator(filter, schema));
  const auto n = static_cast<std::ptrdiff_t>(n_shards);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto begin = static_cast<std::size_t>(k) * kShardRows;
    const auto end = std::min(rows.size(), begin + kShardRows);
    for (auto i = begin; i < end; ++i) shards[static_cast<std::size_t>(k)].add(rows[i]);
  }
  Accumulator out(filter, schema);
  for (const auto& s : shards) out.merge(s);
  return out;
}

namespace serial {
Accumulator accumulate(std::span<const EnrichedSpeech> rows, const AnalysisFilter& filter,
                       const capschema::Schema& schema) {
  Accumulator out(filter, schema);
  for (const auto& r : rows) out.add(r);
  return out;
}
}  // namespace serial

void TopicMatrix::write_tsv(std::ostream& out) const {
  std::vector<std::string> header{"parliament"};
  for (auto c : cols) header.push_back(std::to_string(c.code()));
  out << tsv::join_row(header);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> fields{rows[r]};
    for (const auto& v : values[r]) fields.push_back(v ? tsv::format_double(*v) : "NA");
    out << tsv::join_row(fields);
  }
}

nlohmann::json TopicMatrix::summary(const Accumulator& acc) const {
  nlohmann::json omitted_json = nlohmann::json::array();
  for (const auto& o : omitted) omitted_json.push_back({{"parliament", o.parliament}, {"reason", o.reason}});
  nlohmann::json per_parl = nlohmann::json::object();
  for (const auto& [parl, row] : acc.rows()) {
    per_parl[parl] = {{"kept", row.total},
                      {"female", row.female},
                      {"male", row.male},
                      {"unknown_gender", row.unknown_gender},
                      {"missing_sentiment", row.missing_sentiment}};
  }
  std::size_t empty_cells = 0;
  for (const auto& r : values) {
    empty_cells += static_cast<std::size_t>(std::count(r.begin(), r.end(), std::nullopt));
  }
  const auto& fs = acc.filter_stats();
  return {{"metric", metric},
          {"filter", acc.filter().to_json()},
          {"rows", rows.size()},
          {"columns", cols.size()},
          {"empty_cells", empty_cells},
          {"omitted", omitted_json},
          {"filter_counts",
           {{"seen", fs.seen},
            {"kept", fs.kept},
            {"dropped_year", fs.dropped_year},
            {"dropped_role", fs.dropped_role},
            {"dropped_topic", fs.dropped_topic}}},
          {"parliaments", per_parl}};
}

namespace {

TopicMatrix empty_matrix(const Accumulator& acc, std::string metric) {
  TopicMatrix m;
  m.metric = std::move(metric);
  m.cols = acc.policy_labels();
  return m;
}

double share(std::uint64_t part, std::uint64_t whole) {
  return static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

TopicMatrix topic_distribution(const Accumulator& acc) {
  auto m = empty_matrix(acc, "topics");
  for (const auto& [parl, row] : acc.rows()) {
    std::uint64_t in_columns = 0;
    for (const auto& c : row.cells) in_columns += c.total;
    if (in_columns == 0) {
      m.omitted.push_back({parl, "EmptyParliament"});
      continue;
    }
    std::vector<std::optional<double>> vals;
    for (const auto& c : row.cells) vals.emplace_back(share(c.total, in_columns));
    m.rows.push_back(parl);
    m.values.push_back(std::move(vals));
  }
  return m;
}

TopicMatrix sentiment_by_topic(const Accumulator& acc) {
  auto m = empty_matrix(acc, "sentiment");
  for (const auto& [parl, row] : acc.rows()) {
    if (row.total == 0) {
      m.omitted.push_back({parl, "EmptyParliament"});
      continue;
    }
    std::vector<std::optional<double>> vals;
    for (const auto& c : row.cells) {
      vals.push_back(c.sentiment_n ? std::optional(c.sentiment_sum / static_cast<double>(c.sentiment_n))
                                   : std::nullopt);
    }
    m.rows.push_back(parl);
    m.values.push_back(std::move(vals));
  }
  return m;
}

TopicMatrix gender_topic_difference(const Accumulator& acc) {
  auto m = empty_matrix(acc, "gender");
  for (const auto& [parl, row] : acc.rows()) {
    std::uint64_t female = 0, male = 0;
    for (const auto& c : row.cells) {
      female += c.female;
      male += c.male;
    }
    if (female == 0 && male == 0) {
      m.omitted.push_back({parl, "EmptyParliament"});
      continue;
    }
    if (female == 0 || male == 0) {
      m.omitted.push_back({parl, "MissingGenderData"});
      continue;
    }
    std::vector<std::optional<double>> vals;
    for (const auto& c : row.cells) vals.emplace_back(share(c.female, female) - share(c.male, male));
    m.rows.push_back(parl);
    m.values.push_back(std::move(vals));
  }
  return m;
}

std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "topics") return Metric::topics;
  if (s == "sentiment") return Metric::sentiment;
  if (s == "gender") return Metric::gender;
  return std::nullopt;
}

TopicMatrix compute(Metric metric, const Accumulator& acc) {
  switch (metric) {
    case Metric::topics: return topic_distribution(acc);
    case Metric::sentiment: return sentiment_by_topic(acc);
    case Metric::gender: return gender_topic_difference(acc);
  }
  return topic_distribution(acc);
}

}  // namespace parltopic::analysis
