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

#include "parltopic/corpus.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "parltopic/common.h"
#include "parltopic/rng.h"
#include "parltopic/tsv.h"

namespace parltopic::corpus {

namespace {

using ojson = nlohmann::ordered_json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Open-addressing set of 64-bit fingerprints; 0 marks an empty slot.
class FingerprintSet {
 public:
  FingerprintSet() : slots_(1024, 0) {}

  // Returns false if the fingerprint was already present.
  bool insert(std::uint64_t fp) {
    if (fp == 0) fp = 1;
    if ((size_ + 1) * 2 > slots_.size()) grow();
    if (!place(slots_, fp)) return false;
    ++size_;
    return true;
  }

 private:
  static bool place(std::vector<std::uint64_t>& slots, std::uint64_t fp) {
    const std::size_t mask = slots.size() - 1;
    for (std::size_t i = splitmix64(fp) & mask;; i = (i + 1) & mask) {
      if (slots[i] == fp) return false;
      if (slots[i] == 0) {
        slots[i] = fp;
        return true;
      }
    }
  }

  void grow() {
    std::vector<std::uint64_t> bigger(slots_.size() * 2, 0);
    for (auto fp : slots_) {
      if (fp) place(bigger, fp);
    }
    slots_.swap(bigger);
  }

  std::vector<std::uint64_t> slots_;
  std::size_t size_ = 0;
};

std::optional<std::string> nonempty(std::string s) {
  if (s.empty()) return std::nullopt;
  return s;
}

enum Col {
  kId,
  kParliament,
  kDate,
  kSpeakerId,
  kSpeakerName,
  kGender,
  kRole,
  kPartyId,
  kPartyName,
  kPartyStatus,
  kTextEn,
  kText,
  kNumCols
};

// Fills a Speech from canonical field values; returns an error reason.
std::optional<std::string> build_speech(const std::array<std::string, kNumCols>& f,
                                        Speech& s) {
  if (f[kId].empty()) return "empty id";
  if (tsv::trim(f[kText]).empty()) return "empty text";
  auto date = Date::parse(f[kDate]);
  if (!date) return "invalid date '" + f[kDate] + "'";
  s.id = f[kId];
  s.parliament = f[kParliament];
  s.date = *date;
  s.speaker_id = f[kSpeakerId];
  s.speaker_name = f[kSpeakerName];
  s.speaker_gender = parse_gender(f[kGender]);
  s.speaker_role = parse_role(f[kRole]);
  s.party_id = nonempty(f[kPartyId]);
  s.party_name = nonempty(f[kPartyName]);
  s.party_status = nonempty(f[kPartyStatus]);
  s.text_en = nonempty(f[kTextEn]);
  s.text = f[kText];
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    default: return "unknown";
  }
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::regular: return "regular";
    case Role::chairperson: return "chairperson";
    case Role::guest: return "guest";
    default: return "unknown";
  }
}

std::string_view to_string(Sentiment3 s) {
  switch (s) {
    case Sentiment3::negative: return "negative";
    case Sentiment3::positive: return "positive";
    default: return "neutral";
  }
}

Gender parse_gender(std::string_view s) {
  auto v = lower(tsv::trim(s));
  if (v == "female" || v == "f") return Gender::female;
  if (v == "male" || v == "m") return Gender::male;
  return Gender::unknown;
}

Role parse_role(std::string_view s) {
  auto v = lower(tsv::trim(s));
  if (v == "regular") return Role::regular;
  if (v == "chairperson" || v == "chair") return Role::chairperson;
  if (v == "guest") return Role::guest;
  return Role::unknown;
}

std::optional<Sentiment3> parse_sentiment3(std::string_view s) {
  auto v = lower(tsv::trim(s));
  if (v == "negative") return Sentiment3::negative;
  if (v == "neutral") return Sentiment3::neutral;
  if (v == "positive") return Sentiment3::positive;
  return std::nullopt;
}

std::optional<Date> Date::parse(std::string_view text) {
  text = tsv::trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = tsv::parse_int(text.substr(0, 4));
  auto m = tsv::parse_int(text.substr(5, 2));
  auto d = tsv::parse_int(text.substr(8, 2));
  if (!y || !m || !d || *m < 1 || *d < 1) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year(static_cast<int>(*y)),
                                  std::chrono::month(static_cast<unsigned>(*m)),
                                  std::chrono::day(static_cast<unsigned>(*d))};
  if (!ymd.ok()) return std::nullopt;
  return Date{static_cast<int>(*y), static_cast<unsigned>(*m),
              static_cast<unsigned>(*d)};
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
  return buf;
}

std::optional<SpeechFormat> format_from_path(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  if (ext == ".tsv") return SpeechFormat::tsv;
  if (ext == ".jsonl") return SpeechFormat::jsonl;
  return std::nullopt;
}

const std::vector<std::string>& speech_columns() {
  static const std::vector<std::string> cols = {
      "id",           "parliament", "date",         "speaker_id",
      "speaker_name", "speaker_gender", "speaker_role", "party_id",
      "party_name",   "party_status", "text_en",      "text"};
  return cols;
}

ColumnMapping ColumnMapping::load(const std::filesystem::path& path) {
  auto in = tsv::open_input(path);
  return parse(in);
}

ColumnMapping ColumnMapping::parse(std::istream& in) {
  ColumnMapping m;
  tsv::LineReader lines(in);
  std::string line;
  while (lines.next(line)) {
    auto t = tsv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cols = tsv::split(t);
    if (cols.size() != 2) {
      throw ValidationError("column mapping line " +
                            std::to_string(lines.line_no()) +
                            ": expected source<TAB>canonical");
    }
    m.add(std::string(tsv::trim(cols[0])), std::string(tsv::trim(cols[1])));
  }
  return m;
}

void ColumnMapping::add(std::string source, std::string canonical) {
  renames_[std::move(source)] = std::move(canonical);
}

std::string_view ColumnMapping::canonical(std::string_view source) const {
  auto it = renames_.find(source);
  return it == renames_.end() ? source : std::string_view(it->second);
}

// ---------------------------------------------------------------------------

struct SpeechReader::Impl {
  Impl(std::istream& in, SpeechFormat format, ParseOptions options)
      : lines(in), format(format), options(std::move(options)) {}

  tsv::LineReader lines;
  SpeechFormat format;
  ParseOptions options;
  FingerprintSet seen;
  std::vector<MalformedRow> errors;
  std::size_t records = 0;

  // TSV layout: for each source column, the canonical slot or an extras slot.
  bool header_read = false;
  std::vector<int> slot_of_column;  // -1 - k => extra k
  std::vector<std::string> extra_names;
  std::string line;

  void malformed(std::string reason) {
    errors.push_back({lines.line_no(), std::move(reason)});
    if (errors.size() > options.max_errors) {
      throw ErrorBudgetExceeded(options.max_errors, errors.back().reason);
    }
  }

  void read_header() {
    header_read = true;
    if (!lines.next(line)) return;
    auto cols = tsv::split(line);
    const auto& canon = speech_columns();
    std::vector<bool> present(kNumCols, false);
    for (auto c : cols) {
      const std::string raw = tsv::unescape(c);
      auto name = options.mapping.canonical(raw);
      auto it = std::find(canon.begin(), canon.end(), name);
      if (it != canon.end()) {
        auto slot = static_cast<int>(it - canon.begin());
        if (present[slot]) throw ValidationError("duplicate header column: " + std::string(name));
        present[slot] = true;
        slot_of_column.push_back(slot);
      } else {
        slot_of_column.push_back(-1 - static_cast<int>(extra_names.size()));
        extra_names.emplace_back(name);
      }
    }
    for (int req : {kId, kParliament, kDate, kText}) {
      if (!present[req]) {
        throw ValidationError("speech header lacks required column '" +
                              canon[req] + "'");
      }
    }
  }

  bool parse_tsv(Speech& out) {
    if (!header_read) read_header();
    while (lines.next(line)) {
      if (line.empty()) continue;
      auto cols = tsv::split(line);
      if (cols.size() != slot_of_column.size()) {
        malformed("expected " + std::to_string(slot_of_column.size()) +
                  " columns, got " + std::to_string(cols.size()));
        continue;
      }
      std::array<std::string, kNumCols> fields;
      out.extras.clear();
      for (std::size_t i = 0; i < cols.size(); ++i) {
        int slot = slot_of_column[i];
        if (slot >= 0) {
          fields[slot] = tsv::unescape(cols[i]);
        } else {
          out.extras.emplace_back(extra_names[-1 - slot], tsv::unescape(cols[i]));
        }
      }
      if (auto err = build_speech(fields, out)) {
        malformed(*err);
        continue;
      }
      return true;
    }
    return false;
  }

  bool parse_jsonl(Speech& out) {
    const auto& canon = speech_columns();
    while (lines.next(line)) {
      if (tsv::trim(line).empty()) continue;
      // ordered_json keeps extras in source column order.
      auto obj = ojson::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        malformed("not a JSON object");
        continue;
      }
      std::array<std::string, kNumCols> fields;
      out.extras.clear();
      bool bad = false;
      for (auto& [key, value] : obj.items()) {
        auto name = options.mapping.canonical(key);
        auto it = std::find(canon.begin(), canon.end(), name);
        std::string text;
        if (value.is_string()) {
          text = value.get<std::string>();
        } else if (!value.is_null()) {
          text = value.dump();
        }
        if (it != canon.end()) {
          if (!value.is_string() && !value.is_null()) {
            malformed("field '" + std::string(name) + "' is not a string");
            bad = true;
            break;
          }
          fields[it - canon.begin()] = std::move(text);
        } else {
          out.extras.emplace_back(std::string(name), std::move(text));
        }
      }
      if (bad) continue;
      if (auto err = build_speech(fields, out)) {
        malformed(*err);
        continue;
      }
      return true;
    }
    return false;
  }
};

SpeechReader::SpeechReader(std::istream& in, SpeechFormat format, ParseOptions options)
    : impl_(std::make_unique<Impl>(in, format, std::move(options))) {}
SpeechReader::~SpeechReader() = default;
SpeechReader::SpeechReader(SpeechReader&&) noexcept = default;

bool SpeechReader::next(Speech& out) {
  bool ok = impl_->format == SpeechFormat::tsv ? impl_->parse_tsv(out)
                                               : impl_->parse_jsonl(out);
  if (!ok) return false;
  if (impl_->options.check_duplicates && !impl_->seen.insert(fnv1a64(out.id))) {
    throw DuplicateId(out.id);
  }
  ++impl_->records;
  return true;
}

const std::vector<MalformedRow>& SpeechReader::errors() const { return impl_->errors; }
const std::vector<std::string>& SpeechReader::extra_columns() const {
  return impl_->extra_names;
}
std::size_t SpeechReader::records() const { return impl_->records; }

SpeechFile read_speeches(std::istream& in, SpeechFormat format,
                         const ParseOptions& options) {
  SpeechReader reader(in, format, options);
  SpeechFile file;
  Speech s;
  while (reader.next(s)) file.speeches.push_back(s);
  file.errors = reader.errors();
  file.extra_columns = reader.extra_columns();
  return file;
}

SpeechFile read_speeches(const std::filesystem::path& path,
                         const ParseOptions& options) {
  auto format = format_from_path(path);
  if (!format) throw ValidationError("unknown speech file extension: " + path.string());
  auto in = tsv::open_input(path);
  return read_speeches(in, *format, options);
}

SpeechWriter::SpeechWriter(std::ostream& out, std::vector<std::string> extra_columns)
    : out_(out), extra_columns_(std::move(extra_columns)) {
  auto header = speech_columns();
  header.insert(header.end(), extra_columns_.begin(), extra_columns_.end());
  out_ << tsv::join_row(header);
}

void SpeechWriter::write(const Speech& s) {
  std::vector<std::string> f = {s.id,
                                s.parliament,
                                s.date.to_string(),
                                s.speaker_id,
                                s.speaker_name,
                                std::string(to_string(s.speaker_gender)),
                                std::string(to_string(s.speaker_role)),
                                s.party_id.value_or(""),
                                s.party_name.value_or(""),
                                s.party_status.value_or(""),
                                s.text_en.value_or(""),
                                s.text};
  for (const auto& name : extra_columns_) {
    auto it = std::find_if(s.extras.begin(), s.extras.end(),
                           [&](const auto& kv) { return kv.first == name; });
    f.push_back(it == s.extras.end() ? std::string() : it->second);
  }
  buf_.clear();
  tsv::append_row(buf_, f);
  out_ << buf_;
}

std::string to_jsonl(const Speech& s) {
  ojson obj = ojson::object();
  obj["id"] = s.id;
  obj["parliament"] = s.parliament;
  obj["date"] = s.date.to_string();
  obj["speaker_id"] = s.speaker_id;
  obj["speaker_name"] = s.speaker_name;
  obj["speaker_gender"] = to_string(s.speaker_gender);
  obj["speaker_role"] = to_string(s.speaker_role);
  obj["party_id"] = s.party_id ? ojson(*s.party_id) : ojson(nullptr);
  obj["party_name"] = s.party_name ? ojson(*s.party_name) : ojson(nullptr);
  obj["party_status"] = s.party_status ? ojson(*s.party_status) : ojson(nullptr);
  obj["text_en"] = s.text_en ? ojson(*s.text_en) : ojson(nullptr);
  obj["text"] = s.text;
  for (const auto& [k, v] : s.extras) obj[k] = v;
  return obj.dump();
}

// ---------------------------------------------------------------------------

struct SentenceReader::Impl {
  Impl(std::istream& in, ParseOptions options) : lines(in), options(std::move(options)) {}

  tsv::LineReader lines;
  ParseOptions options;
  FingerprintSet seen;
  std::vector<MalformedRow> errors;
  bool header_read = false;
  std::size_t c_id = 0, c_index = 0, c_text = 0, c_score = 0, c_label = 0;
  std::size_t ncols = 0;
  std::string line;

  void malformed(std::string reason) {
    errors.push_back({lines.line_no(), std::move(reason)});
    if (errors.size() > options.max_errors) {
      throw ErrorBudgetExceeded(options.max_errors, errors.back().reason);
    }
  }

  void read_header() {
    header_read = true;
    if (!lines.next(line)) return;
    std::vector<std::string> names;
    for (auto c : tsv::split(line)) {
      names.emplace_back(options.mapping.canonical(tsv::unescape(c)));
    }
    tsv::HeaderIndex h(names);
    auto need = [&](std::string_view n) {
      auto i = h.find(n);
      if (!i) throw ValidationError("sentence header lacks column '" + std::string(n) + "'");
      return *i;
    };
    c_id = need("speech_id");
    c_index = need("sentence_index");
    c_text = need("sentence_text");
    c_score = need("score");
    c_label = need("label3");
    ncols = names.size();
  }
};

SentenceReader::SentenceReader(std::istream& in, ParseOptions options)
    : impl_(std::make_unique<Impl>(in, std::move(options))) {}
SentenceReader::~SentenceReader() = default;
SentenceReader::SentenceReader(SentenceReader&&) noexcept = default;

bool SentenceReader::next(SentenceSentiment& out) {
  auto& d = *impl_;
  if (!d.header_read) d.read_header();
  while (d.lines.next(d.line)) {
    if (d.line.empty()) continue;
    auto cols = tsv::split(d.line);
    if (cols.size() != d.ncols) {
      d.malformed("expected " + std::to_string(d.ncols) + " columns, got " +
                  std::to_string(cols.size()));
      continue;
    }
    auto index = tsv::parse_int(cols[d.c_index]);
    auto score = tsv::parse_double(cols[d.c_score]);
    auto label = parse_sentiment3(cols[d.c_label]);
    if (cols[d.c_id].empty()) {
      d.malformed("empty speech_id");
      continue;
    }
    if (!index || *index < 0) {
      d.malformed("invalid sentence_index");
      continue;
    }
    if (!score) {
      d.malformed("invalid score");
      continue;
    }
    if (!label) {
      d.malformed("invalid label3");
      continue;
    }
    if (*score < 0.0 || *score > 5.0) throw ScoreOutOfRange(d.lines.line_no(), *score);
    out.speech_id = tsv::unescape(cols[d.c_id]);
    out.sentence_index = static_cast<std::uint32_t>(*index);
    out.sentence_text = tsv::unescape(cols[d.c_text]);
    out.score = *score;
    out.label3 = *label;
    if (d.options.check_duplicates &&
        !d.seen.insert(fnv1a64(out.speech_id) ^ splitmix64(out.sentence_index))) {
      throw ValidationError("duplicate sentence (" + out.speech_id + ", " +
                            std::to_string(out.sentence_index) + ")");
    }
    return true;
  }
  return false;
}

const std::vector<MalformedRow>& SentenceReader::errors() const { return impl_->errors; }

std::vector<SentenceSentiment> read_sentences(std::istream& in,
                                              const ParseOptions& options) {
  SentenceReader reader(in, options);
  std::vector<SentenceSentiment> out;
  SentenceSentiment s;
  while (reader.next(s)) out.push_back(s);
  return out;
}

}  // namespace parltopic::corpus
