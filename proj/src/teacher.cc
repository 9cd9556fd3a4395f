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

#include "parltopic/teacher.h"

#include <cctype>
#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "parltopic/common.h"
#include "parltopic/tsv.h"
#include "parltopic/work_pool.h"

namespace parltopic::teacher {

namespace {

using capschema::CapLabel;
using capschema::Schema;

std::string_view strip_decoration(std::string_view s) {
  auto junk = [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isspace(u) || (std::ispunct(u) && c != '{' && c != '}');
  };
  while (!s.empty() && junk(s.front()) && s.front() != '-') s.remove_prefix(1);
  while (!s.empty() && junk(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<CapLabel> label_from_token(std::string_view token, const Schema& schema) {
  if (auto code = tsv::parse_int(token)) {
    if (*code >= 0 && *code <= 100000) return schema.find_code(static_cast<int>(*code));
    return std::nullopt;
  }
  return schema.find_name(token);
}

struct Slot {
  std::optional<LabeledExample> example;
  std::optional<AnnotationFailure> failure;
  bool unavailable = false;
  std::size_t retries = 0;
  std::size_t prompt_chars = 0;
  std::size_t response_chars = 0;
  int attempts = 0;
};

void annotate_one(const corpus::Speech& speech, const capschema::PromptTemplate& tmpl,
                  TeacherBackend& backend, const AnnotateOptions& options, Slot& slot) {
  TeacherRequest req{speech.id, capschema::build_teacher_prompt(speech.text, tmpl, *options.schema),
                     speech.text};
  const auto& policy = options.retry;
  TeacherResponse resp;
  for (int attempt = 1; attempt <= std::max(1, policy.max_attempts); ++attempt) {
    slot.attempts = attempt;
    slot.prompt_chars += req.prompt.size();
    try {
      resp = backend.complete(req);
    } catch (const std::exception& e) {
      resp = TeacherResponse::failure(req.id, ErrorKind::transient, e.what());
    }
    if (resp.ok() || resp.error_kind == ErrorKind::permanent) break;
    if (attempt < policy.max_attempts) {
      ++slot.retries;
      auto delay = policy.base_delay.count() * std::pow(policy.backoff, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay));
    }
  }

  if (!resp.ok()) {
    slot.unavailable = resp.error_kind == ErrorKind::unavailable;
    slot.failure = AnnotationFailure{speech.id, "backend error: " + resp.detail, std::nullopt,
                                     slot.attempts};
    return;
  }
  slot.response_chars += resp.text->size();
  if (resp.id != req.id) {
    slot.failure = AnnotationFailure{speech.id, "response id mismatch: " + resp.id, resp.text,
                                     slot.attempts};
    return;
  }
  try {
    auto label = parse_teacher_response(*resp.text, *options.schema);
    slot.example = LabeledExample{speech, label, LabelSource::teacher, options.annotator_id,
                                  std::move(resp.text)};
  } catch (const Unparseable&) {
    slot.failure = AnnotationFailure{speech.id, "unparseable", std::move(resp.text), slot.attempts};
  }
}

}  // namespace

TeacherResponse TeacherResponse::success(std::string id, std::string text) {
  TeacherResponse r;
  r.id = std::move(id);
  r.text = std::move(text);
  return r;
}

TeacherResponse TeacherResponse::failure(std::string id, ErrorKind kind, std::string detail) {
  TeacherResponse r;
  r.id = std::move(id);
  r.error_kind = kind;
  r.detail = std::move(detail);
  return r;
}

CapLabel parse_teacher_response(std::string_view text, const Schema& schema) {
  auto core = strip_decoration(text);
  if (auto label = label_from_token(core, schema)) return *label;

  auto trimmed = tsv::trim(text);
  auto json = nlohmann::json::parse(trimmed.begin(), trimmed.end(), nullptr, false);
  if (!json.is_discarded() && json.is_object() && json.contains("label")) {
    const auto& v = json["label"];
    if (v.is_number_integer()) {
      auto code = v.get<long long>();
      if (code >= 0 && code <= 100000) {
        if (auto label = schema.find_code(static_cast<int>(code))) return *label;
      }
    } else if (v.is_string()) {
      auto s = v.get<std::string>();
      if (auto label = label_from_token(strip_decoration(s), schema)) return *label;
    }
  }
  throw Unparseable(std::string(text));
}

AnnotateStats annotate_batch(const sampling::SpeechSource& speeches,
                             const capschema::PromptTemplate& tmpl, TeacherBackend& backend,
                             const AnnotateOptions& options, const OutcomeSink& sink) {
  AnnotateStats stats;
  stats.cost.usd_per_1k_prompt_tokens = options.usd_per_1k_prompt_tokens;
  stats.cost.usd_per_1k_response_tokens = options.usd_per_1k_response_tokens;
  const std::size_t window = std::max<std::size_t>(1, options.max_in_flight);
  WorkPool pool(window);
  std::size_t consecutive_unavailable = 0;

  std::vector<corpus::Speech> batch;
  std::vector<Slot> slots;
  bool more = true;
  while (more) {
    batch.clear();
    corpus::Speech s;
    while (batch.size() < window && (more = speeches(s))) batch.push_back(std::move(s));
    if (batch.empty()) break;
    slots.assign(batch.size(), Slot{});
    pool.run(batch.size(), [&](std::size_t i) {
      annotate_one(batch[i], tmpl, backend, options, slots[i]);
    });
    // Single writer: accounting and emission happen here, in input order.
    for (auto& slot : slots) {
      ++stats.inputs;
      stats.retries += slot.retries;
      stats.cost.requests += static_cast<std::size_t>(slot.attempts);
      stats.cost.prompt_chars += slot.prompt_chars;
      stats.cost.response_chars += slot.response_chars;
      consecutive_unavailable = slot.unavailable ? consecutive_unavailable + 1 : 0;
      if (slot.example) {
        ++stats.labeled;
        sink(std::move(*slot.example));
      } else {
        ++stats.failed;
        sink(std::move(*slot.failure));
      }
      if (consecutive_unavailable > options.retry.unavailable_budget) {
        throw BackendUnavailable("teacher backend " + backend.describe() + " unavailable for " +
                                 std::to_string(consecutive_unavailable) +
                                 " consecutive items");
      }
    }
  }
  return stats;
}

AnnotationRun annotate_all(std::span<const corpus::Speech> speeches,
                           const capschema::PromptTemplate& tmpl, TeacherBackend& backend,
                           const AnnotateOptions& options) {
  AnnotationRun run;
  run.stats = annotate_batch(sampling::source_of(speeches), tmpl, backend, options,
                             [&](AnnotationOutcome&& o) {
                               if (auto* e = std::get_if<LabeledExample>(&o)) {
                                 run.labeled.push_back(std::move(*e));
                               } else {
                                 run.failures.push_back(std::get<AnnotationFailure>(std::move(o)));
                               }
                             });
  return run;
}

}  // namespace parltopic::teacher
