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

#include "parltopic/assembly.h"

#include <algorithm>
#include <numeric>

#include "parltopic/common.h"
#include "parltopic/tsv.h"

namespace parltopic::assembly {

using corpus::SentenceSentiment;
using corpus::Sentiment3;

void SentimentCuts::validate() const {
  if (!(0.0 <= negative_below && negative_below <= positive_above && positive_above <= 5.0)) {
    throw ValidationError("sentiment cut points must satisfy 0 <= negative_below <= positive_above <= 5");
  }
}

SpeechSentiment aggregate_speech_sentiment(std::span<const SentenceSentiment> sentences,
                                           const SentimentCuts& cuts) {
  if (sentences.empty()) throw NoSentences();
  double sum = 0;
  for (const auto& s : sentences) sum += s.score;
  SpeechSentiment out;
  out.mean = sum / static_cast<double>(sentences.size());
  if (out.mean < cuts.negative_below) {
    out.label3 = Sentiment3::negative;
  } else if (out.mean > cuts.positive_above) {
    out.label3 = Sentiment3::positive;
  } else {
    out.label3 = Sentiment3::neutral;
  }
  return out;
}

JoinTable JoinTable::parse(std::istream& in) {
  JoinTable t;
  tsv::LineReader lines(in);
  std::string line;
  bool header = true;
  while (lines.next(line)) {
    if (header) {
      header = false;
      continue;
    }
    if (tsv::trim(line).empty()) continue;
    auto cols = tsv::split(line);
    if (cols.size() != 2) {
      throw ValidationError("join table line " + std::to_string(lines.line_no()) +
                            ": expected key<TAB>value");
    }
    t.insert(tsv::unescape(cols[0]), tsv::unescape(cols[1]));
  }
  return t;
}

JoinTable JoinTable::load(const std::filesystem::path& path) {
  auto in = tsv::open_input(path);
  return parse(in);
}

void JoinTable::insert(std::string key, std::string value) {
  if (!map_.emplace(key, std::move(value)).second) {
    throw ValidationError("join table: duplicate key " + key);
  }
}

const std::string* JoinTable::find(std::string_view key) const {
  auto it = map_.find(key);
  return it == map_.end() ? nullptr : &it->second;
}

EnrichedSpeech join_external_ids(EnrichedSpeech speech, const JoinTable& partyfacts,
                                 const JoinTable& vdem, JoinStats& stats) {
  ++stats.rows;
  const std::string* pf = speech.speech.party_id ? partyfacts.find(*speech.speech.party_id) : nullptr;
  if (pf) {
    speech.partyfacts_id = *pf;
  } else {
    speech.partyfacts_id.reset();
    ++stats.partyfacts_misses;
  }
  if (const auto* v = vdem.find(speech.speech.parliament)) {
    speech.vdem_country_id = *v;
  } else {
    speech.vdem_country_id.reset();
    ++stats.vdem_misses;
  }
  return speech;
}

const std::vector<std::string>& speech_text_columns() {
  static const std::vector<std::string> cols = {
      "id",           "parliament",      "date",          "speaker_id",
      "speaker_name", "speaker_gender",  "speaker_role",  "party_id",
      "party_name",   "party_status",    "partyfacts_id", "vdem_country_id",
      "topic",        "topic_confidence", "sentiment_label", "sentiment_score_mean",
      "text_en",      "text"};
  return cols;
}

const std::vector<std::string>& speech_columns() {
  static const std::vector<std::string> cols(speech_text_columns().begin(),
                                             speech_text_columns().end() - 2);
  return cols;
}

const std::vector<std::string>& sentence_columns() {
  static const std::vector<std::string> cols = {"speech_id", "sentence_index", "label3", "score",
                                                "sentence_text"};
  return cols;
}

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json files_json = nlohmann::json::array();
  for (const auto& f : files) {
    files_json.push_back({{"name", f.name}, {"rows", f.rows}, {"bytes", f.bytes}});
  }
  return {{"parliament", parliament}, {"files", files_json}, {"orphan_sentences", orphan_sentences}};
}

namespace {

std::vector<std::string> metadata_fields(const EnrichedSpeech& e) {
  const auto& s = e.speech;
  return {s.id,
          s.parliament,
          s.date.to_string(),
          s.speaker_id,
          s.speaker_name,
          std::string(corpus::to_string(s.speaker_gender)),
          std::string(corpus::to_string(s.speaker_role)),
          s.party_id.value_or(""),
          s.party_name.value_or(""),
          s.party_status.value_or(""),
          e.partyfacts_id.value_or(""),
          e.vdem_country_id.value_or(""),
          e.topic.to_string(),
          tsv::format_double(e.topic_confidence),
          e.sentiment_label ? std::string(corpus::to_string(*e.sentiment_label)) : "",
          e.sentiment_score_mean ? tsv::format_double(*e.sentiment_score_mean) : ""};
}

std::optional<std::string> nonempty(std::string s) {
  if (s.empty()) return std::nullopt;
  return s;
}

}  // namespace

DatasetManifest emit_dataset(const std::string& parliament,
                             std::span<const EnrichedSpeech> speeches,
                             std::span<const SentenceSentiment> sentences,
                             const std::filesystem::path& out_dir) {
  for (std::size_t i = 1; i < speeches.size(); ++i) {
    if (!(speeches[i - 1].speech.id < speeches[i].speech.id)) {
      throw UnsortedInput("speeches not strictly sorted by id at " + speeches[i].speech.id);
    }
  }
  for (std::size_t i = 1; i < sentences.size(); ++i) {
    const auto& a = sentences[i - 1];
    const auto& b = sentences[i];
    if (std::tie(a.speech_id, a.sentence_index) >= std::tie(b.speech_id, b.sentence_index)) {
      throw UnsortedInput("sentences not sorted by (speech_id, sentence_index) at " + b.speech_id);
    }
  }

  DatasetManifest manifest;
  manifest.parliament = parliament;
  const auto base = out_dir / parliament;

  tsv::AtomicFile with_text(base.string() + "_speeches_text.tsv");
  tsv::AtomicFile without_text(base.string() + "_speeches.tsv");
  tsv::AtomicFile sentence_file(base.string() + "_sentences.tsv");
  with_text.stream() << tsv::join_row(speech_text_columns());
  without_text.stream() << tsv::join_row(speech_columns());
  sentence_file.stream() << tsv::join_row(sentence_columns());

  std::string buf;
  for (const auto& e : speeches) {
    auto fields = metadata_fields(e);
    buf.clear();
    tsv::append_row(buf, fields);
    without_text.stream() << buf;
    fields.push_back(e.speech.text_en.value_or(""));
    fields.push_back(e.speech.text);
    buf.clear();
    tsv::append_row(buf, fields);
    with_text.stream() << buf;
  }

  // Both inputs are sorted by id, so orphans are found by a merge walk.
  std::size_t sentence_rows = 0;
  std::size_t si = 0;
  for (const auto& s : sentences) {
    while (si < speeches.size() && speeches[si].speech.id < s.speech_id) ++si;
    if (si == speeches.size() || speeches[si].speech.id != s.speech_id) {
      ++manifest.orphan_sentences;
      continue;
    }
    buf.clear();
    tsv::append_row(buf, {s.speech_id, std::to_string(s.sentence_index),
                          std::string(corpus::to_string(s.label3)), tsv::format_double(s.score),
                          s.sentence_text});
    sentence_file.stream() << buf;
    ++sentence_rows;
  }

  auto name_of = [&](const char* suffix) { return parliament + suffix; };
  manifest.files.push_back({name_of("_speeches_text.tsv"), speeches.size(), with_text.commit()});
  manifest.files.push_back({name_of("_speeches.tsv"), speeches.size(), without_text.commit()});
  manifest.files.push_back({name_of("_sentences.tsv"), sentence_rows, sentence_file.commit()});
  return manifest;
}

std::vector<EnrichedSpeech> read_enriched_speeches(std::istream& in) {
  std::vector<EnrichedSpeech> out;
  tsv::LineReader lines(in);
  std::string line;
  if (!lines.next(line)) return out;
  const bool with_text = tsv::join_row(speech_text_columns()) == line + "\n";
  if (!with_text && tsv::join_row(speech_columns()) != line + "\n") {
    throw ValidationError("unexpected enriched speech header");
  }
  const auto& cols = with_text ? speech_text_columns() : speech_columns();
  while (lines.next(line)) {
    if (line.empty()) continue;
    auto raw = tsv::split(line);
    auto where = "enriched speech line " + std::to_string(lines.line_no());
    if (raw.size() != cols.size()) throw ValidationError(where + ": wrong column count");
    std::vector<std::string> f;
    for (auto r : raw) f.push_back(tsv::unescape(r));
    EnrichedSpeech e;
    auto& s = e.speech;
    s.id = f[0];
    s.parliament = f[1];
    auto date = corpus::Date::parse(f[2]);
    if (!date) throw ValidationError(where + ": invalid date");
    s.date = *date;
    s.speaker_id = f[3];
    s.speaker_name = f[4];
    s.speaker_gender = corpus::parse_gender(f[5]);
    s.speaker_role = corpus::parse_role(f[6]);
    s.party_id = nonempty(f[7]);
    s.party_name = nonempty(f[8]);
    s.party_status = nonempty(f[9]);
    e.partyfacts_id = nonempty(f[10]);
    e.vdem_country_id = nonempty(f[11]);
    auto topic = capschema::FinalLabel::parse(f[12]);
    if (!topic) throw UnknownLabel(where + ": unknown topic " + f[12]);
    e.topic = *topic;
    auto conf = tsv::parse_double(f[13]);
    if (!conf) throw ValidationError(where + ": invalid topic_confidence");
    e.topic_confidence = *conf;
    if (!f[14].empty()) e.sentiment_label = corpus::parse_sentiment3(f[14]);
    if (!f[15].empty()) e.sentiment_score_mean = tsv::parse_double(f[15]);
    if (with_text) {
      s.text_en = nonempty(f[16]);
      s.text = f[17];
    }
    out.push_back(std::move(e));
  }
  return out;
}

DatasetManifest assemble_parliament(const std::string& parliament, AssemblyInputs inputs,
                                    const JoinTable& partyfacts, const JoinTable& vdem,
                                    const SentimentCuts& cuts,
                                    const std::filesystem::path& out_dir, AssemblyStats& stats) {
  auto& speeches = inputs.speeches;
  std::sort(speeches.begin(), speeches.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  auto& sentences = inputs.sentences;
  std::sort(sentences.begin(), sentences.end(), [](const auto& a, const auto& b) {
    return std::tie(a.speech_id, a.sentence_index) < std::tie(b.speech_id, b.sentence_index);
  });

  std::vector<EnrichedSpeech> enriched;
  enriched.reserve(speeches.size());
  std::size_t si = 0;
  for (auto& s : speeches) {
    EnrichedSpeech e;
    if (auto it = inputs.predictions.find(s.id); it != inputs.predictions.end()) {
      e.topic = it->second.label;
      e.topic_confidence = it->second.confidence;
    } else {
      ++stats.missing_predictions;
    }
    while (si < sentences.size() && sentences[si].speech_id < s.id) ++si;
    auto first = si;
    while (si < sentences.size() && sentences[si].speech_id == s.id) ++si;
    if (si > first) {
      auto agg = aggregate_speech_sentiment(std::span(sentences).subspan(first, si - first), cuts);
      e.sentiment_label = agg.label3;
      e.sentiment_score_mean = agg.mean;
      ++stats.with_sentiment;
    }
    e.speech = std::move(s);
    enriched.push_back(join_external_ids(std::move(e), partyfacts, vdem, stats.joins));
  }
  return emit_dataset(parliament, enriched, sentences, out_dir);
}

}  // namespace parltopic::assembly
