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

// The per-parliament release files:
//
//   <parl>_speeches_text.tsv  every speech field, topic, sentiment, external ids
//   <parl>_speeches.tsv       the same without text and text_en
//   <parl>_sentences.tsv      speech_id, sentence_index, label3, score, sentence_text

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "parltopic/capschema.h"
#include "parltopic/corpus.h"
#include "parltopic/inference.h"

namespace parltopic::assembly {

struct SentimentCuts {
  /// mean < negative_below -> negative; mean > positive_above -> positive.
  double negative_below = 2.5;
  double positive_above = 3.5;

  /// Throws ValidationError unless 0 <= negative_below <= positive_above <= 5.
  void validate() const;
};

struct SpeechSentiment {
  double mean = 0.0;
  corpus::Sentiment3 label3 = corpus::Sentiment3::neutral;
};

/// Throws NoSentences.
SpeechSentiment aggregate_speech_sentiment(std::span<const corpus::SentenceSentiment> sentences,
                                           const SentimentCuts& cuts = {});

struct EnrichedSpeech {
  corpus::Speech speech;
  capschema::FinalLabel topic = capschema::FinalLabel::mix();
  double topic_confidence = 0.0;
  /// Both set iff the speech had sentence data.
  std::optional<corpus::Sentiment3> sentiment_label;
  std::optional<double> sentiment_score_mean;
  std::optional<std::string> partyfacts_id;
  std::optional<std::string> vdem_country_id;

  bool operator==(const EnrichedSpeech&) const = default;
};

/// key -> external id, read from `key<TAB>value` rows after a header.
class JoinTable {
 public:
  /// Throws ValidationError on duplicate keys.
  static JoinTable parse(std::istream& in);
  static JoinTable load(const std::filesystem::path& path);

  void insert(std::string key, std::string value);
  const std::string* find(std::string_view key) const;
  std::size_t size() const { return map_.size(); }

 private:
  std::map<std::string, std::string, std::less<>> map_;
};

struct JoinStats {
  std::size_t rows = 0;
  std::size_t partyfacts_misses = 0;
  std::size_t vdem_misses = 0;
};

/// Fills partyfacts_id by party_id and vdem_country_id by parliament code.
/// Misses leave the field empty and are counted.
EnrichedSpeech join_external_ids(EnrichedSpeech speech, const JoinTable& partyfacts,
                                 const JoinTable& vdem, JoinStats& stats);

const std::vector<std::string>& speech_text_columns();
const std::vector<std::string>& speech_columns();
const std::vector<std::string>& sentence_columns();

struct FileEntry {
  std::string name;
  std::size_t rows = 0;
  std::uintmax_t bytes = 0;
};

struct DatasetManifest {
  std::string parliament;
  std::vector<FileEntry> files;
  std::size_t orphan_sentences = 0;

  nlohmann::json to_json() const;
};

/// Writes the three files atomically. Speeches must be sorted by id
/// (strictly increasing) and sentences by (speech_id, sentence_index);
/// otherwise UnsortedInput is thrown. Sentences whose speech is absent are
/// dropped and counted as orphans.
DatasetManifest emit_dataset(const std::string& parliament,
                             std::span<const EnrichedSpeech> speeches,
                             std::span<const corpus::SentenceSentiment> sentences,
                             const std::filesystem::path& out_dir);

/// Reads a `<parl>_speeches_text.tsv` or `<parl>_speeches.tsv` file back.
/// Text fields stay empty for the latter.
std::vector<EnrichedSpeech> read_enriched_speeches(std::istream& in);

struct AssemblyInputs {
  std::vector<corpus::Speech> speeches;
  /// Keyed by speech id.
  std::map<std::string, inference::PredictionRow, std::less<>> predictions;
  std::vector<corpus::SentenceSentiment> sentences;
};

struct AssemblyStats {
  JoinStats joins;
  std::size_t missing_predictions = 0;
  std::size_t with_sentiment = 0;
};

/// Sorts the inputs, attaches topic, sentiment and external ids, and emits
/// the dataset for one parliament. Speeches without a prediction get Mix
/// with confidence 0 and are counted.
DatasetManifest assemble_parliament(const std::string& parliament, AssemblyInputs inputs,
                                    const JoinTable& partyfacts, const JoinTable& vdem,
                                    const SentimentCuts& cuts,
                                    const std::filesystem::path& out_dir, AssemblyStats& stats);

}  // namespace parltopic::assembly
