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

#include "parltopic/labeled.h"

#include "parltopic/common.h"
#include "parltopic/tsv.h"

namespace parltopic {

std::string_view to_string(LabelSource s) {
  switch (s) {
    case LabelSource::human: return "human";
    case LabelSource::gold: return "gold";
    default: return "teacher";
  }
}

std::optional<LabelSource> parse_label_source(std::string_view s) {
  if (s == "teacher") return LabelSource::teacher;
  if (s == "human") return LabelSource::human;
  if (s == "gold") return LabelSource::gold;
  return std::nullopt;
}

AnnotationWriter::AnnotationWriter(std::ostream& out) : out_(out) {
  out_ << "speech_id\tlabel_code\tsource\traw_response\n";
}

void AnnotationWriter::write(const AnnotationRecord& r) {
  out_ << tsv::join_row({r.speech_id, r.label.to_string(), std::string(to_string(r.source)),
                         r.raw_response.value_or("")});
}

void AnnotationWriter::write(const LabeledExample& e) {
  write(AnnotationRecord{e.speech.id, capschema::AnnotatorLabel::cap(e.label), e.source,
                         e.raw_response});
}

std::vector<AnnotationRecord> read_annotations(std::istream& in,
                                               const capschema::Schema& schema) {
  std::vector<AnnotationRecord> out;
  tsv::LineReader lines(in);
  std::string line;
  if (!lines.next(line)) return out;
  if (tsv::split(line).size() != 4 || tsv::split(line)[0] != "speech_id") {
    throw ValidationError("annotations file: unexpected header");
  }
  while (lines.next(line)) {
    if (line.empty()) continue;
    auto cols = tsv::split(line);
    auto where = "annotations line " + std::to_string(lines.line_no());
    if (cols.size() != 4) throw ValidationError(where + ": expected 4 columns");
    auto label = capschema::AnnotatorLabel::parse(cols[1], schema);
    if (!label) throw UnknownLabel(where + ": unknown label '" + std::string(cols[1]) + "'");
    auto source = parse_label_source(cols[2]);
    if (!source) throw ValidationError(where + ": unknown source '" + std::string(cols[2]) + "'");
    AnnotationRecord r;
    r.speech_id = tsv::unescape(cols[0]);
    r.label = *label;
    r.source = *source;
    if (!cols[3].empty()) r.raw_response = tsv::unescape(cols[3]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path,
                                               const capschema::Schema& schema) {
  auto in = tsv::open_input(path);
  return read_annotations(in, schema);
}

std::vector<LabeledExample> join_labeled(const std::vector<AnnotationRecord>& annotations,
                                         const std::vector<corpus::Speech>& speeches,
                                         std::string_view annotator_id) {
  std::unordered_map<std::string_view, const corpus::Speech*> by_id;
  by_id.reserve(speeches.size());
  for (const auto& s : speeches) by_id.emplace(s.id, &s);
  std::vector<LabeledExample> out;
  for (const auto& a : annotations) {
    if (a.label.is_do_not_know()) continue;
    auto it = by_id.find(a.speech_id);
    if (it == by_id.end()) continue;
    out.push_back({*it->second, a.label.cap(), a.source, std::string(annotator_id),
                   a.raw_response});
  }
  return out;
}

}  // namespace parltopic
