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


#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "parltopic/assembly.h"
#include "parltopic/common.h"
#include "parltopic/synthetic.h"
#include "support/support.h"

using namespace parltopic;
using namespace parltopic::assembly;
using parltopic::testing::TempDir;
using parltopic::testing::make_speech;
using parltopic::testing::read_file;

namespace {

corpus::SentenceSentiment sentence(std::string id, std::uint32_t idx, double score) {
  corpus::SentenceSentiment s;
  s.speech_id = std::move(id);
  s.sentence_index = idx;
  s.sentence_text = "sentence " + std::to_string(idx);
  s.score = score;
  return s;
}

EnrichedSpeech enriched(std::string id, int code) {
  EnrichedSpeech e;
  e.speech = make_speech(std::move(id), "tekst", "HR");
  e.speech.text_en = "text";
  e.topic = capschema::FinalLabel::cap(capschema::label_from_code(code));
  e.topic_confidence = 0.75;
  return e;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_SUITE("assembly") {

TEST_CASE("speech sentiment is the mean of sentence scores") {
  std::vector<corpus::SentenceSentiment> a = {sentence("s", 0, 2.0), sentence("s", 1, 3.0)};
  auto ra = aggregate_speech_sentiment(a);
  CHECK(ra.mean == doctest::Approx(2.5));
  CHECK(ra.label3 == corpus::Sentiment3::neutral);

  std::vector<corpus::SentenceSentiment> b = {sentence("s", 0, 5.0)};
  CHECK(aggregate_speech_sentiment(b).label3 == corpus::Sentiment3::positive);

  std::vector<corpus::SentenceSentiment> c = {sentence("s", 0, 1.0), sentence("s", 1, 1.5),
                                              sentence("s", 2, 2.0)};
  auto rc = aggregate_speech_sentiment(c);
  CHECK(rc.mean == doctest::Approx(1.5));
  CHECK(rc.label3 == corpus::Sentiment3::negative);

  std::vector<corpus::SentenceSentiment> none;
  CHECK_THROWS_AS(aggregate_speech_sentiment(none), NoSentences);
}

TEST_CASE("cut points are exclusive") {
  std::vector<corpus::SentenceSentiment> at_low = {sentence("s", 0, 2.5)};
  std::vector<corpus::SentenceSentiment> at_high = {sentence("s", 0, 3.5)};
  CHECK(aggregate_speech_sentiment(at_low).label3 == corpus::Sentiment3::neutral);
  CHECK(aggregate_speech_sentiment(at_high).label3 == corpus::Sentiment3::neutral);
}

TEST_CASE("cut points are configurable and validated") {
  std::vector<corpus::SentenceSentiment> a = {sentence("s", 0, 2.8)};
  CHECK(aggregate_speech_sentiment(a, SentimentCuts{3.0, 4.0}).label3 == corpus::Sentiment3::negative);
  CHECK_THROWS_AS((SentimentCuts{3.0, 2.0}.validate()), ValidationError);
  CHECK_THROWS_AS((SentimentCuts{-1.0, 2.0}.validate()), ValidationError);
  CHECK_NOTHROW(SentimentCuts{}.validate());
}

TEST_CASE("external id joins count misses") {
  JoinTable parties;
  JoinTable vdem;
  vdem.insert("HR", "154");
  JoinStats stats;
  std::vector<EnrichedSpeech> out;
  for (int i = 0; i < 10; ++i) {
    auto e = enriched("s" + std::to_string(i), 1);
    e.speech.party_id = "p" + std::to_string(i);
    if (i < 7) parties.insert("p" + std::to_string(i), std::to_string(100 + i));
    out.push_back(join_external_ids(std::move(e), parties, vdem, stats));
  }
  CHECK(stats.rows == 10);
  CHECK(stats.partyfacts_misses == 3);
  CHECK(stats.vdem_misses == 0);
  CHECK(out[0].partyfacts_id == "100");
  CHECK_FALSE(out[8].partyfacts_id.has_value());
  CHECK(out[9].vdem_country_id == "154");
}

TEST_CASE("join tables reject duplicate keys") {
  std::istringstream ok("key\tvalue\na\t1\nb\t2\n");
  CHECK(JoinTable::parse(ok).size() == 2);
  std::istringstream dup("key\tvalue\na\t1\na\t2\n");
  CHECK_THROWS_AS(JoinTable::parse(dup), ValidationError);
}

TEST_CASE("empty input gives header-only files") {
  TempDir dir("asm-empty");
  auto m = emit_dataset("HR", {}, {}, dir.path());
  REQUIRE(m.files.size() == 3);
  for (const auto& f : m.files) {
    CHECK(f.rows == 0);
    CHECK(line_count(read_file(dir / f.name)) == 1);
  }
}

TEST_CASE("unsorted input is rejected") {
  TempDir dir("asm-unsorted");
  std::vector<EnrichedSpeech> speeches = {enriched("b", 1), enriched("a", 2)};
  CHECK_THROWS_AS(emit_dataset("HR", speeches, {}, dir.path()), UnsortedInput);
  std::vector<EnrichedSpeech> dup = {enriched("a", 1), enriched("a", 2)};
  CHECK_THROWS_AS(emit_dataset("HR", dup, {}, dir.path()), UnsortedInput);
  std::vector<EnrichedSpeech> fine = {enriched("a", 1)};
  std::vector<corpus::SentenceSentiment> sents = {sentence("a", 1, 3.0), sentence("a", 0, 3.0)};
  CHECK_THROWS_AS(emit_dataset("HR", fine, sents, dir.path()), UnsortedInput);
}

TEST_CASE("orphan sentences are dropped and counted") {
  TempDir dir("asm-orphan");
  std::vector<EnrichedSpeech> speeches = {enriched("a", 1), enriched("c", 2)};
  std::vector<corpus::SentenceSentiment> sents = {sentence("a", 0, 3.0), sentence("b", 0, 3.0),
                                                  sentence("b", 1, 3.0), sentence("c", 0, 3.0)};
  auto m = emit_dataset("HR", speeches, sents, dir.path());
  CHECK(m.orphan_sentences == 2);
  const auto text = read_file(dir / "HR_sentences.tsv");
  CHECK(line_count(text) == 3);
  CHECK(m.to_json()["orphan_sentences"] == 2);
}

TEST_CASE("the no-text file is smaller and omits text columns") {
  TempDir dir("asm-cols");
  std::vector<EnrichedSpeech> speeches = {enriched("a", 1), enriched("b", 7)};
  emit_dataset("HR", speeches, {}, dir.path());
  const auto with_text = read_file(dir / "HR_speeches_text.tsv");
  const auto without = read_file(dir / "HR_speeches.tsv");
  CHECK(without.size() < with_text.size());
  CHECK(speech_columns().size() + 2 == speech_text_columns().size());
  for (const auto& c : speech_columns()) {
    CHECK(c != "text");
    CHECK(c != "text_en");
  }
}

TEST_CASE("emitted speeches read back unchanged") {
  TempDir dir("asm-rt");
  synthetic::CorpusSpec spec;
  spec.parliament = "HR";
  spec.n_speeches = 80;
  spec.seed = 3;
  auto corpus = synthetic::generate(spec);
  std::vector<EnrichedSpeech> rows;
  for (std::size_t i = 0; i < corpus.speeches.size(); ++i) {
    EnrichedSpeech e;
    e.speech = corpus.speeches[i];
    if (i % 5 == 0) {
      e.topic = capschema::FinalLabel::mix();
    } else {
      e.topic = capschema::FinalLabel::cap(capschema::label_from_code(corpus.topic_codes[i]));
    }
    e.topic_confidence = 0.5 + 0.001 * static_cast<double>(i);
    if (i % 3 == 0) {
      e.sentiment_label = corpus::Sentiment3::positive;
      e.sentiment_score_mean = 3.0 + 1.0 / 3.0;
    }
    if (i % 4 != 0) e.partyfacts_id = std::to_string(i);
    e.vdem_country_id = "154";
    rows.push_back(std::move(e));
  }
  emit_dataset("HR", rows, {}, dir.path());
  std::ifstream in(dir / "HR_speeches_text.tsv");
  auto back = read_enriched_speeches(in);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(back[i] == rows[i]);

  std::ifstream in2(dir / "HR_speeches.tsv");
  auto no_text = read_enriched_speeches(in2);
  REQUIRE(no_text.size() == rows.size());
  CHECK(no_text[1].speech.text.empty());
  CHECK(no_text[1].topic == rows[1].topic);
}

TEST_CASE("assembled fixture matches the golden files") {
  TempDir dir("asm-golden");
  synthetic::CorpusSpec spec;
  spec.parliament = "HR";
  spec.n_speeches = 50;
  spec.seed = 11;
  auto corpus = synthetic::generate(spec);
  AssemblyInputs inputs;
  inputs.speeches = corpus.speeches;
  inputs.sentences = corpus.sentences;
  for (std::size_t i = 0; i < corpus.speeches.size(); ++i) {
    if (i == 7) continue;  // one speech without a prediction
    inference::PredictionRow row;
    row.speech_id = corpus.speeches[i].id;
    row.confidence = i % 6 == 0 ? 0.4 : 0.9;
    if (row.confidence >= 0.6) {
      row.label = capschema::FinalLabel::cap(capschema::label_from_code(corpus.topic_codes[i]));
    }
    inputs.predictions.emplace(row.speech_id, row);
  }
  JoinTable parties;
  for (const auto& s : corpus.speeches) {
    if (s.party_id && s.party_id->back() != '3' && !parties.find(*s.party_id)) {
      parties.insert(*s.party_id, "pf-" + *s.party_id);
    }
  }
  JoinTable vdem;
  vdem.insert("HR", "154");
  AssemblyStats stats;
  auto m = assemble_parliament("HR", std::move(inputs), parties, vdem, SentimentCuts{},
                               dir.path(), stats);
  CHECK(stats.missing_predictions == 1);
  CHECK(stats.joins.rows == 50);
  CHECK(m.files[0].rows == 50);
  for (const auto& f : m.files) {
    const auto msg = parltopic::testing::golden_mismatch(
        std::filesystem::path(PARLTOPIC_TEST_DATA) / "golden" / "assembly" / f.name,
        read_file(dir / f.name));
    CHECK_MESSAGE(msg.empty(), msg);
  }
}

}  // TEST_SUITE
