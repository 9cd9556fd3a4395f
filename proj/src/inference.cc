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

#include "parltopic/inference.h"

#include <cmath>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "parltopic/tsv.h"
#include "parltopic/work_pool.h"

namespace parltopic::inference {

using capschema::CapLabel;
using capschema::FinalLabel;

void ThresholdPolicy::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ValidationError("threshold must lie in [0, 1], got " + tsv::format_double(tau));
  }
}

FinalLabel resolve(const Prediction& pred, const ThresholdPolicy& policy) {
  return pred.confidence < policy.tau ? FinalLabel::mix() : FinalLabel::cap(pred.label);
}

std::vector<FinalLabel> resolve_all(std::span<const Prediction> preds,
                                    const ThresholdPolicy& policy) {
  std::vector<FinalLabel> out(preds.size(), FinalLabel::mix());
  const auto n = static_cast<std::ptrdiff_t>(preds.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = resolve(preds[i], policy);
  return out;
}

namespace serial {
std::vector<FinalLabel> resolve_all(std::span<const Prediction> preds,
                                    const ThresholdPolicy& policy) {
  std::vector<FinalLabel> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(resolve(p, policy));
  return out;
}
}  // namespace serial

nlohmann::json to_json(const StudentRequest& r) { return {{"id", r.id}, {"text", r.text}}; }

StudentResult student_result_from_json(const nlohmann::json& j) {
  StudentResult r;
  if (!j.is_object()) {
    r.error = "response is not an object";
    return r;
  }
  if (j.contains("id") && j["id"].is_string()) r.id = j["id"].get<std::string>();
  if (j.contains("error")) {
    r.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    return r;
  }
  if (!j.contains("label_code") || !j["label_code"].is_number_integer() ||
      !j.contains("confidence") || !j["confidence"].is_number()) {
    r.error = "response lacks label_code/confidence";
    return r;
  }
  r.label_code = j["label_code"].get<int>();
  r.confidence = j["confidence"].get<double>();
  return r;
}

namespace {

struct BatchOutcome {
  std::vector<ClassifiedSpeech> items;
  bool call_failed = false;
  std::size_t retries = 0;
};

ClassifiedSpeech failed_item(std::string id, std::string why) {
  ClassifiedSpeech c;
  c.speech_id = std::move(id);
  c.failed = true;
  c.failure = std::move(why);
  return c;
}

void classify_batch(std::span<const StudentRequest> requests, StudentBackend& student,
                    const ClassifyOptions& options, BatchOutcome& out) {
  std::vector<StudentResult> results;
  std::string last_error;
  bool ok = false;
  const int attempts = std::max(1, options.max_attempts);
  for (int attempt = 1; attempt <= attempts && !ok; ++attempt) {
    try {
      results = student.predict(requests);
      ok = true;
    } catch (const std::exception& e) {
      last_error = e.what();
      if (attempt < attempts) {
        ++out.retries;
        auto delay = options.base_delay.count() * std::pow(2.0, attempt - 1);
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay));
      }
    }
  }
  out.items.clear();
  if (!ok) {
    out.call_failed = true;
    for (const auto& r : requests) out.items.push_back(failed_item(r.id, last_error));
    return;
  }
  std::unordered_map<std::string_view, const StudentResult*> by_id;
  for (const auto& r : results) by_id.emplace(r.id, &r);
  for (const auto& req : requests) {
    auto it = by_id.find(req.id);
    if (it == by_id.end()) {
      out.items.push_back(failed_item(req.id, "no response for id"));
      continue;
    }
    const auto& r = *it->second;
    if (!r.ok()) {
      out.items.push_back(failed_item(req.id, r.error));
      continue;
    }
    auto label = options.schema->find_code(*r.label_code);
    if (!label) {
      out.items.push_back(failed_item(req.id, "unknown label_code " + std::to_string(*r.label_code)));
      continue;
    }
    if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) {
      out.items.push_back(failed_item(req.id, "confidence outside [0,1]"));
      continue;
    }
    ClassifiedSpeech c;
    c.speech_id = req.id;
    c.raw_label = *label;
    c.confidence = r.confidence;
    c.label = resolve(Prediction{req.id, *label, r.confidence}, options.policy);
    out.items.push_back(std::move(c));
  }
}

}  // namespace

ClassifyStats batch_classify(const sampling::SpeechSource& speeches, StudentBackend& student,
                             const ClassifyOptions& options, const ClassifiedSink& sink) {
  options.policy.validate();
  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
  const std::size_t concurrent = std::max<std::size_t>(1, options.max_concurrent);
  WorkPool pool(concurrent);
  ClassifyStats stats;
  std::size_t consecutive_failed_batches = 0;

  // Re-sequencing buffer: at most `concurrent` batches in flight.
  std::vector<StudentRequest> window;
  std::vector<BatchOutcome> outcomes(concurrent);
  bool more = true;
  while (more) {
    window.clear();
    corpus::Speech s;
    while (window.size() < batch_size * concurrent && (more = speeches(s))) {
      window.push_back({std::move(s.id), std::move(s.text)});
    }
    if (window.empty()) break;
    const std::size_t n_batches = (window.size() + batch_size - 1) / batch_size;
    pool.run(n_batches, [&](std::size_t b) {
      auto begin = b * batch_size;
      auto len = std::min(batch_size, window.size() - begin);
      outcomes[b] = BatchOutcome{};
      classify_batch(std::span(window).subspan(begin, len), student, options, outcomes[b]);
    });
    for (std::size_t b = 0; b < n_batches; ++b) {
      auto& o = outcomes[b];
      ++stats.batches;
      stats.retries += o.retries;
      consecutive_failed_batches = o.call_failed ? consecutive_failed_batches + 1 : 0;
      if (consecutive_failed_batches > options.unavailable_budget) {
        throw StudentUnavailable("student backend " + student.describe() + " failed " +
                                 std::to_string(consecutive_failed_batches) +
                                 " consecutive batches");
      }
      for (auto& item : o.items) {
        ++stats.inputs;
        if (item.failed) ++stats.failed;
        if (item.label.is_mix()) ++stats.mix;
        sink(std::move(item));
      }
    }
  }
  return stats;
}

void CoverageCounter::add(const ClassifiedSpeech& c) { add(c.label, c.failed); }

void CoverageCounter::add(const FinalLabel& label, bool failed) {
  ++acc_.n;
  if (failed) ++acc_.failed;
  if (label.is_mix()) {
    ++acc_.mix;
  } else {
    ++acc_.kept;
    ++acc_.per_label_counts[label.cap().code()];
  }
}

void CoverageCounter::merge(const CoverageCounter& other) {
  acc_.n += other.acc_.n;
  acc_.kept += other.acc_.kept;
  acc_.mix += other.acc_.mix;
  acc_.failed += other.acc_.failed;
  for (const auto& [code, count] : other.acc_.per_label_counts) acc_.per_label_counts[code] += count;
}

CoverageReport CoverageCounter::report() const {
  CoverageReport r = acc_;
  if (r.n) {
    r.kept_fraction = static_cast<double>(r.kept) / static_cast<double>(r.n);
    r.mix_fraction = static_cast<double>(r.mix) / static_cast<double>(r.n);
  }
  return r;
}

CoverageReport coverage_report(std::span<const ClassifiedSpeech> results) {
  CoverageCounter counter;
  for (const auto& r : results) counter.add(r);
  return counter.report();
}

PredictionWriter::PredictionWriter(std::ostream& out) : out_(out) {
  out_ << "speech_id\tlabel_code\tconfidence\n";
}

void PredictionWriter::write(const ClassifiedSpeech& c) {
  write(c.speech_id, c.label, c.confidence);
}

void PredictionWriter::write(std::string_view speech_id, const FinalLabel& label,
                             double confidence) {
  out_ << tsv::join_row({std::string(speech_id), label.to_string(), tsv::format_double(confidence)});
}

std::vector<PredictionRow> read_predictions(std::istream& in, const capschema::Schema& schema) {
  std::vector<PredictionRow> out;
  tsv::LineReader lines(in);
  std::string line;
  if (!lines.next(line)) return out;
  while (lines.next(line)) {
    if (line.empty()) continue;
    auto cols = tsv::split(line);
    auto where = "predictions line " + std::to_string(lines.line_no());
    if (cols.size() != 3) throw ValidationError(where + ": expected 3 columns");
    auto label = FinalLabel::parse(cols[1], schema);
    if (!label) throw UnknownLabel(where + ": unknown label '" + std::string(cols[1]) + "'");
    auto conf = tsv::parse_double(cols[2]);
    if (!conf || *conf < 0.0 || *conf > 1.0) throw ValidationError(where + ": invalid confidence");
    out.push_back({tsv::unescape(cols[0]), *label, *conf});
  }
  return out;
}

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path,
                                            const capschema::Schema& schema) {
  auto in = tsv::open_input(path);
  return read_predictions(in, schema);
}

}  // namespace parltopic::inference
