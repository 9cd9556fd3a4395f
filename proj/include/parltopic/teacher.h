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

// Teacher-LLM annotation: a provider-agnostic backend interface, the
// response parser, and the bounded-concurrency annotation driver.

#include <chrono>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "parltopic/capschema.h"
#include "parltopic/corpus.h"
#include "parltopic/labeled.h"
#include "parltopic/sampling.h"

namespace parltopic::teacher {

struct TeacherRequest {
  std::string id;
  std::string prompt;
  /// The bare speech, for in-process mocks. Never sent over the wire.
  std::string_view speech_text;
};

enum class ErrorKind {
  transient,    // retry (rate limit, 5xx, timeout)
  permanent,    // do not retry (4xx, malformed reply)
  unavailable,  // backend unreachable; retried, then counts toward the fatal budget
};

struct TeacherResponse {
  std::string id;
  std::optional<std::string> text;  // set on success
  ErrorKind error_kind = ErrorKind::permanent;
  std::string detail;

  bool ok() const { return text.has_value(); }
  static TeacherResponse success(std::string id, std::string text);
  static TeacherResponse failure(std::string id, ErrorKind kind, std::string detail);
};

/// Implementations must tolerate concurrent complete() calls.
class TeacherBackend {
 public:
  virtual ~TeacherBackend() = default;
  virtual TeacherResponse complete(const TeacherRequest& request) = 0;
  virtual std::string describe() const = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
  double backoff = 2.0;
  /// Consecutive items ending unavailable before the run aborts.
  std::size_t unavailable_budget = 32;
};

/// Character-count proxy (about four characters per token).
struct CostEstimate {
  std::size_t requests = 0;
  std::size_t prompt_chars = 0;
  std::size_t response_chars = 0;
  double usd_per_1k_prompt_tokens = 0.0;
  double usd_per_1k_response_tokens = 0.0;

  double prompt_tokens() const { return prompt_chars / 4.0; }
  double response_tokens() const { return response_chars / 4.0; }
  double usd() const {
    return prompt_tokens() / 1000.0 * usd_per_1k_prompt_tokens +
           response_tokens() / 1000.0 * usd_per_1k_response_tokens;
  }
};

struct AnnotateOptions {
  std::size_t max_in_flight = 64;
  RetryPolicy retry;
  std::string annotator_id = "teacher";
  double usd_per_1k_prompt_tokens = 0.0;
  double usd_per_1k_response_tokens = 0.0;
  const capschema::Schema* schema = &capschema::Schema::builtin();
};

struct AnnotationFailure {
  std::string speech_id;
  std::string reason;
  std::optional<std::string> raw_response;
  int attempts = 0;
};

using AnnotationOutcome = std::variant<LabeledExample, AnnotationFailure>;
using OutcomeSink = std::function<void(AnnotationOutcome&&)>;

struct AnnotateStats {
  std::size_t inputs = 0;
  std::size_t labeled = 0;
  std::size_t failed = 0;
  std::size_t retries = 0;
  CostEstimate cost;
};

/// Accepts, in priority order: a bare integer code, a label name
/// (case-insensitive, exact), or a JSON object whose "label" field holds
/// either. Surrounding whitespace and punctuation are ignored.
/// Throws Unparseable.
capschema::CapLabel parse_teacher_response(
    std::string_view text, const capschema::Schema& schema = capschema::Schema::builtin());

/// Annotates every speech with up to `max_in_flight` concurrent backend
/// calls and hands one outcome per input to `sink`, in input order.
/// Transient errors are retried with exponential backoff; items that still
/// fail become AnnotationFailure. Throws BackendUnavailable once more than
/// `retry.unavailable_budget` consecutive items end unavailable.
AnnotateStats annotate_batch(const sampling::SpeechSource& speeches,
                             const capschema::PromptTemplate& tmpl, TeacherBackend& backend,
                             const AnnotateOptions& options, const OutcomeSink& sink);

struct AnnotationRun {
  std::vector<LabeledExample> labeled;
  std::vector<AnnotationFailure> failures;
  AnnotateStats stats;
};

AnnotationRun annotate_all(std::span<const corpus::Speech> speeches,
                           const capschema::PromptTemplate& tmpl, TeacherBackend& backend,
                           const AnnotateOptions& options = {});

}  // namespace parltopic::teacher
