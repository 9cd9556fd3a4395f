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

// Confidence-thresholded topic classification through a student model.
//
// Student wire contract (one JSON object per item):
//   request  {"id": str, "text": str}
//   response {"id": str, "label_code": int, "confidence": float}
//            or {"id": str, "error": str}
// confidence is the maximum class probability.

#include <chrono>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "parltopic/capschema.h"
#include "parltopic/common.h"
#include "parltopic/sampling.h"

namespace parltopic::inference {

struct Prediction {
  std::string speech_id;
  capschema::CapLabel label{capschema::kOtherCode};
  double confidence = 0.0;
};

struct ThresholdPolicy {
  double tau = 0.60;
  /// Throws ValidationError unless tau is in [0, 1].
  void validate() const;
};

/// The predicted label when confidence >= tau, else Mix. A confidence
/// exactly at tau keeps its label.
capschema::FinalLabel resolve(const Prediction& pred, const ThresholdPolicy& policy);

/// resolve() over a whole prediction set. OpenMP-parallel.
std::vector<capschema::FinalLabel> resolve_all(std::span<const Prediction> preds,
                                               const ThresholdPolicy& policy);
namespace serial {
std::vector<capschema::FinalLabel> resolve_all(std::span<const Prediction> preds,
                                               const ThresholdPolicy& policy);
}  // namespace serial

struct StudentRequest {
  std::string id;
  std::string text;
};

struct StudentResult {
  std::string id;
  std::optional<int> label_code;
  double confidence = 0.0;
  std::string error;

  bool ok() const { return label_code.has_value(); }
};

nlohmann::json to_json(const StudentRequest& r);
/// Parses one response object; malformed objects become error results.
StudentResult student_result_from_json(const nlohmann::json& j);

/// Thrown by a backend when a whole call failed (transport error). Per-item
/// problems are returned as error results instead.
class StudentCallError : public Error {
 public:
  using Error::Error;
};

/// Implementations must tolerate concurrent predict() calls.
class StudentBackend {
 public:
  virtual ~StudentBackend() = default;
  virtual std::vector<StudentResult> predict(std::span<const StudentRequest> batch) = 0;
  virtual std::string describe() const = 0;
};

struct ClassifyOptions {
  std::size_t batch_size = 32;
  std::size_t max_concurrent = 4;
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{200};
  /// Consecutive batches failing every attempt before the run aborts.
  std::size_t unavailable_budget = 8;
  ThresholdPolicy policy;
  const capschema::Schema* schema = &capschema::Schema::builtin();
};

struct ClassifiedSpeech {
  std::string speech_id;
  capschema::FinalLabel label = capschema::FinalLabel::mix();
  double confidence = 0.0;
  /// The student's label before thresholding; empty on failure.
  std::optional<capschema::CapLabel> raw_label;
  bool failed = false;
  std::string failure;
};

using ClassifiedSink = std::function<void(ClassifiedSpeech&&)>;

struct ClassifyStats {
  std::size_t inputs = 0;
  std::size_t failed = 0;
  std::size_t mix = 0;
  std::size_t retries = 0;
  std::size_t batches = 0;
};

/// One output per input, in input order. Failed items (after retries)
/// become Mix with confidence 0 and `failed` set. Throws StudentUnavailable
/// after `unavailable_budget` consecutive fully failed batches.
ClassifyStats batch_classify(const sampling::SpeechSource& speeches, StudentBackend& student,
                             const ClassifyOptions& options, const ClassifiedSink& sink);

struct CoverageReport {
  std::size_t n = 0;
  std::size_t kept = 0;
  std::size_t mix = 0;
  std::size_t failed = 0;
  /// Both fractions are 0 when n is 0.
  double kept_fraction = 0.0;
  double mix_fraction = 0.0;
  std::map<int, std::size_t> per_label_counts;
  bool empty() const { return n == 0; }
};

/// Mergeable streaming counter behind coverage_report.
class CoverageCounter {
 public:
  void add(const ClassifiedSpeech& c);
  void add(const capschema::FinalLabel& label, bool failed = false);
  void merge(const CoverageCounter& other);
  CoverageReport report() const;

 private:
  CoverageReport acc_;
};

CoverageReport coverage_report(std::span<const ClassifiedSpeech> results);

/// predictions-tsv: speech_id<TAB>label_code_or_MIX<TAB>confidence.
class PredictionWriter {
 public:
  explicit PredictionWriter(std::ostream& out);
  void write(const ClassifiedSpeech& c);
  void write(std::string_view speech_id, const capschema::FinalLabel& label, double confidence);

 private:
  std::ostream& out_;
};

struct PredictionRow {
  std::string speech_id;
  capschema::FinalLabel label = capschema::FinalLabel::mix();
  double confidence = 0.0;
};

std::vector<PredictionRow> read_predictions(
    std::istream& in, const capschema::Schema& schema = capschema::Schema::builtin());
std::vector<PredictionRow> read_predictions(
    const std::filesystem::path& path,
    const capschema::Schema& schema = capschema::Schema::builtin());

}  // namespace parltopic::inference
