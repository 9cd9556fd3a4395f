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

// Rare-label augmentation: keyword search over English translations, a
// per-keyword capped random sample of the hits, teacher filtering of the
// candidates, and the merge into the training split.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parltopic/capschema.h"
#include "parltopic/corpus.h"
#include "parltopic/labeled.h"
#include "parltopic/sampling.h"
#include "parltopic/teacher.h"

namespace parltopic::mining {

struct KeywordSpec {
  capschema::CapLabel target_label{capschema::kPublicLandsCode};
  /// Lowercase phrases.
  std::vector<std::string> keywords;
  std::size_t cap_per_keyword = 2000;
  std::uint64_t seed = 0;

  /// Throws ValidationError on an empty list or blank phrase.
  void validate() const;

  /// Reads `label_code<TAB>keyword` rows (header first) and keeps the rows
  /// for `target`. Phrases are trimmed and lowercased; duplicates dropped.
  static KeywordSpec parse(std::istream& in, capschema::CapLabel target);
  static KeywordSpec load(const std::filesystem::path& path, capschema::CapLabel target);
  /// The shipped Public Lands list.
  static KeywordSpec builtin_public_lands();
};

/// ASCII lowercase; other bytes unchanged.
std::string ascii_lower(std::string_view text);

/// True if `phrase` occurs in `text` with no word character directly
/// before or after it. Word characters are ASCII alphanumerics, '_' and any
/// non-ASCII byte. Both arguments must already be lowercase.
bool contains_phrase(std::string_view text, std::string_view phrase);

using KeywordHits = std::vector<std::uint32_t>;

/// For each text, the indices of the keywords it contains (ascending).
/// OpenMP-parallel over texts.
std::vector<KeywordHits> match_keywords(std::span<const std::string> lowered_texts,
                                        std::span<const std::string> keywords);

namespace serial {
std::vector<KeywordHits> match_keywords(std::span<const std::string> lowered_texts,
                                        std::span<const std::string> keywords);
}  // namespace serial

struct MiningResult {
  /// Deduplicated by id, in stream order.
  std::vector<corpus::Speech> candidates;
  std::vector<std::size_t> matches_per_keyword;
  /// Contribution of each keyword before the union; never above the cap.
  std::vector<std::size_t> taken_per_keyword;
  std::size_t scanned = 0;
  std::size_t skipped_no_english = 0;
};

/// Scans in chunks of `chunk` speeches. Each keyword keeps its own seeded
/// reservoir, so adding a keyword never changes another keyword's sample.
MiningResult mine_candidates(const sampling::SpeechSource& speeches, const KeywordSpec& spec,
                             std::size_t chunk = 4096);

struct FilterResult {
  std::vector<LabeledExample> accepted;
  std::vector<teacher::AnnotationFailure> failures;
  std::size_t candidates = 0;
  teacher::AnnotateStats stats;

  double acceptance_rate() const {
    return candidates == 0 ? 0.0 : static_cast<double>(accepted.size()) / candidates;
  }
};

/// Annotates every candidate with the standard teacher prompt and keeps
/// those labeled with the target label.
FilterResult filter_by_teacher(std::span<const corpus::Speech> candidates,
                               const KeywordSpec& spec, teacher::TeacherBackend& backend,
                               const capschema::PromptTemplate& tmpl,
                               const teacher::AnnotateOptions& options = {});

struct MergeConflict {
  std::string speech_id;
  capschema::CapLabel kept;
  capschema::CapLabel rejected;
};

struct MergeResult {
  std::vector<LabeledExample> merged;
  std::size_t added = 0;
  std::vector<MergeConflict> conflicts;
};

/// Union by speech id: train first, then accepted examples not already
/// present, in input order. On an id collision the train label wins and a
/// differing label is recorded as a conflict.
MergeResult merge_augmentation(const std::vector<LabeledExample>& train,
                               const std::vector<LabeledExample>& accepted);

}  // namespace parltopic::mining
