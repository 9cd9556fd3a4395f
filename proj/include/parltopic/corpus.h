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

// Speech and sentence-sentiment records, and streaming readers/writers for
// the speech-tsv, speech-jsonl and sentence TSV formats.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace parltopic::corpus {

enum class Gender { female, male, unknown };
enum class Role { regular, chairperson, guest, unknown };
enum class Sentiment3 { negative, neutral, positive };

std::string_view to_string(Gender g);
std::string_view to_string(Role r);
std::string_view to_string(Sentiment3 s);
/// Unmapped source values become unknown. Accepts ParlaMint's F/M codes.
Gender parse_gender(std::string_view s);
Role parse_role(std::string_view s);
std::optional<Sentiment3> parse_sentiment3(std::string_view s);

struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  /// ISO-8601 calendar date, YYYY-MM-DD.
  static std::optional<Date> parse(std::string_view text);
  std::string to_string() const;
  auto operator<=>(const Date&) const = default;
};

struct Speech {
  std::string id;
  std::string parliament;
  std::string text;
  std::optional<std::string> text_en;
  Date date;
  std::string speaker_id;
  std::string speaker_name;
  Gender speaker_gender = Gender::unknown;
  Role speaker_role = Role::unknown;
  std::optional<std::string> party_id;
  std::optional<std::string> party_name;
  std::optional<std::string> party_status;
  /// Columns outside the canonical schema, in source column order.
  std::vector<std::pair<std::string, std::string>> extras;

  bool operator==(const Speech&) const = default;
};

struct SentenceSentiment {
  std::string speech_id;
  std::uint32_t sentence_index = 0;
  std::string sentence_text;
  double score = 0;
  Sentiment3 label3 = Sentiment3::neutral;

  bool operator==(const SentenceSentiment&) const = default;
};

enum class SpeechFormat { tsv, jsonl };
std::optional<SpeechFormat> format_from_path(const std::filesystem::path& p);

/// Canonical speech-tsv column order.
const std::vector<std::string>& speech_columns();

struct MalformedRow {
  std::size_t line_no = 0;
  std::string reason;
};

/// Renames source columns (or JSONL keys) to canonical names, so tabular
/// exports with different headers can be ingested unchanged.
class ColumnMapping {
 public:
  ColumnMapping() = default;
  /// Reads `source<TAB>canonical` lines; `#` starts a comment.
  static ColumnMapping load(const std::filesystem::path& path);
  static ColumnMapping parse(std::istream& in);

  void add(std::string source, std::string canonical);
  std::string_view canonical(std::string_view source) const;
  bool empty() const { return renames_.empty(); }

 private:
  std::map<std::string, std::string, std::less<>> renames_;
};

struct ParseOptions {
  std::size_t max_errors = 100;
  bool check_duplicates = true;
  ColumnMapping mapping;
};

/// Single-pass streaming reader. Memory use is independent of the number of
/// rows apart from an 8-byte fingerprint per id for duplicate detection.
///
/// Malformed rows are collected until more than `max_errors` have been seen,
/// then ErrorBudgetExceeded is thrown. A repeated id throws DuplicateId.
class SpeechReader {
 public:
  SpeechReader(std::istream& in, SpeechFormat format, ParseOptions options = {});
  ~SpeechReader();
  SpeechReader(SpeechReader&&) noexcept;

  /// Returns false at end of input.
  bool next(Speech& out);

  const std::vector<MalformedRow>& errors() const;
  /// Extra (non-canonical) TSV columns, in header order.
  const std::vector<std::string>& extra_columns() const;
  std::size_t records() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SpeechFile {
  std::vector<Speech> speeches;
  std::vector<MalformedRow> errors;
  std::vector<std::string> extra_columns;
};

SpeechFile read_speeches(std::istream& in, SpeechFormat format,
                         const ParseOptions& options = {});
SpeechFile read_speeches(const std::filesystem::path& path,
                         const ParseOptions& options = {});

class SpeechWriter {
 public:
  /// Writes the header immediately. Extras not named in `extra_columns`
  /// are dropped; named extras missing from a record are written empty.
  SpeechWriter(std::ostream& out, std::vector<std::string> extra_columns = {});
  void write(const Speech& s);

 private:
  std::ostream& out_;
  std::vector<std::string> extra_columns_;
  std::string buf_;
};

std::string to_jsonl(const Speech& s);

/// Sentence TSV: header with columns speech_id, sentence_index,
/// sentence_text, score and label3, in any order.
class SentenceReader {
 public:
  SentenceReader(std::istream& in, ParseOptions options = {});
  ~SentenceReader();
  SentenceReader(SentenceReader&&) noexcept;

  /// Throws ScoreOutOfRange for scores outside [0, 5].
  bool next(SentenceSentiment& out);
  const std::vector<MalformedRow>& errors() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<SentenceSentiment> read_sentences(std::istream& in,
                                              const ParseOptions& options = {});

}  // namespace parltopic::corpus
