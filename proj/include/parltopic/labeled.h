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

// Labeled speeches and the annotations-tsv file format:
//   speech_id<TAB>label_code<TAB>source<TAB>raw_response
// label_code is a schema code, or DNK for a human "do not know".

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "parltopic/capschema.h"
#include "parltopic/corpus.h"

namespace parltopic {

enum class LabelSource { teacher, human, gold };

std::string_view to_string(LabelSource s);
std::optional<LabelSource> parse_label_source(std::string_view s);

/// Training and test data never carry Mix or do-not-know.
struct LabeledExample {
  corpus::Speech speech;
  capschema::CapLabel label{capschema::kOtherCode};
  LabelSource source = LabelSource::teacher;
  std::string annotator_id;
  std::optional<std::string> raw_response;
};

/// One row of an annotations-tsv file.
struct AnnotationRecord {
  std::string speech_id;
  capschema::AnnotatorLabel label = capschema::AnnotatorLabel::do_not_know();
  LabelSource source = LabelSource::teacher;
  std::optional<std::string> raw_response;
};

class AnnotationWriter {
 public:
  explicit AnnotationWriter(std::ostream& out);
  void write(const AnnotationRecord& r);
  void write(const LabeledExample& e);

 private:
  std::ostream& out_;
};

std::vector<AnnotationRecord> read_annotations(
    std::istream& in, const capschema::Schema& schema = capschema::Schema::builtin());
std::vector<AnnotationRecord> read_annotations(
    const std::filesystem::path& path,
    const capschema::Schema& schema = capschema::Schema::builtin());

/// Pairs annotations with their speeches, dropping do-not-know rows and
/// rows whose speech is absent. Output follows annotation order.
std::vector<LabeledExample> join_labeled(
    const std::vector<AnnotationRecord>& annotations,
    const std::vector<corpus::Speech>& speeches, std::string_view annotator_id);

}  // namespace parltopic
