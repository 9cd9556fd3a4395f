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

#include <random>
#include <sstream>
#include <string>

#include "parltopic/common.h"
#include "parltopic/corpus.h"
#include "parltopic/tsv.h"
#include "support/support.h"

using namespace parltopic;
using namespace parltopic::corpus;

namespace {

const char* kHeader =
    "id\tparliament\tdate\tspeaker_id\tspeaker_name\tspeaker_gender\tspeaker_role\t"
    "party_id\tparty_name\tparty_status\ttext_en\ttext\n";

std::string row(const std::string& id, const std::string& text,
                const std::string& role = "regular", const std::string& date = "2020-01-02") {
  return id + "\tHR\t" + date + "\ts1\tAna\tF\t" + role + "\tp1\tParty\tcoalition\t\t" + text +
         "\n";
}

Speech random_speech(std::mt19937_64& gen, int i) {
  static const std::vector<std::string> pool = {"a", "b", "c", " ", "\t", "\n", "\\",
                                                "\xc5\xbe", "\xc4\x87", "x"};
  auto str = [&](std::size_t n) {
    std::string s;
    for (std::size_t k = 0; k < n; ++k) s += pool[gen() % pool.size()];
    return s;
  };
  Speech s;
  s.id = "S" + std::to_string(i);
  s.parliament = (gen() % 2) ? "ES-CT" : "HR";
  s.text = "t" + str(gen() % 30);
  if (gen() % 2) s.text_en = "e" + str(gen() % 20);
  s.date = Date{2000 + static_cast<int>(gen() % 25), 1 + static_cast<unsigned>(gen() % 12),
                1 + static_cast<unsigned>(gen() % 28)};
  s.speaker_id = str(gen() % 5);
  s.speaker_name = str(gen() % 8);
  s.speaker_gender = static_cast<Gender>(gen() % 3);
  s.speaker_role = static_cast<Role>(gen() % 4);
  if (gen() % 2) s.party_id = "p" + str(3);
  if (gen() % 2) s.party_name = "n" + str(4);
  if (gen() % 2) s.party_status = "opposition";
  s.extras = {{"term", std::to_string(gen() % 10)}, {"agenda", str(gen() % 6)}};
  return s;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("empty file with a valid header yields no speeches") {
  std::istringstream in(kHeader);
  auto f = read_speeches(in, SpeechFormat::tsv);
  CHECK(f.speeches.empty());
  CHECK(f.errors.empty());
}

TEST_CASE("row with blank text is reported, the rest parse") {
  std::istringstream in(std::string(kHeader) + row("a", "first") + row("b", "   ") +
                        row("c", "third"));
  auto f = read_speeches(in, SpeechFormat::tsv);
  REQUIRE(f.speeches.size() == 2);
  CHECK(f.speeches[0].id == "a");
  CHECK(f.speeches[1].id == "c");
  REQUIRE(f.errors.size() == 1);
  CHECK(f.errors[0].line_no == 3);
}

TEST_CASE("chairperson role is recognised") {
  std::istringstream in(std::string(kHeader) + row("a", "x", "chairperson"));
  auto f = read_speeches(in, SpeechFormat::tsv);
  REQUIRE(f.speeches.size() == 1);
  CHECK(f.speeches[0].speaker_role == Role::chairperson);
  CHECK(f.speeches[0].speaker_gender == Gender::female);
}

TEST_CASE("unmapped vocabulary becomes unknown") {
  CHECK(parse_gender("nonbinary-code") == Gender::unknown);
  CHECK(parse_gender("M") == Gender::male);
  CHECK(parse_role("Minister") == Role::unknown);
  CHECK(parse_role("Chair") == Role::chairperson);
}

TEST_CASE("dates must be valid ISO calendar dates") {
  CHECK(Date::parse("2020-02-29"));
  CHECK_FALSE(Date::parse("2021-02-29"));
  CHECK_FALSE(Date::parse("2021-13-01"));
  CHECK_FALSE(Date::parse("2021-1-01"));
  CHECK(Date::parse("1999-12-31")->to_string() == "1999-12-31");
  std::istringstream in(std::string(kHeader) + row("a", "x", "regular", "2021-02-30"));
  auto f = read_speeches(in, SpeechFormat::tsv);
  CHECK(f.speeches.empty());
  CHECK(f.errors.size() == 1);
}

TEST_CASE("duplicate ids are fatal") {
  std::istringstream in(std::string(kHeader) + row("a", "x") + row("a", "y"));
  CHECK_THROWS_AS(read_speeches(in, SpeechFormat::tsv), DuplicateId);
}

TEST_CASE("error budget aborts after the configured count") {
  std::string text = kHeader;
  for (int i = 0; i < 5; ++i) text += "broken row\n";
  {
    std::istringstream in(text);
    ParseOptions opts;
    opts.max_errors = 5;
    CHECK(read_speeches(in, SpeechFormat::tsv, opts).errors.size() == 5);
  }
  {
    std::istringstream in(text);
    ParseOptions opts;
    opts.max_errors = 4;
    CHECK_THROWS_AS(read_speeches(in, SpeechFormat::tsv, opts), ErrorBudgetExceeded);
  }
}

TEST_CASE("missing required header column is a validation error") {
  std::istringstream in("id\tparliament\tdate\nx\tHR\t2020-01-01\n");
  CHECK_THROWS_AS(read_speeches(in, SpeechFormat::tsv), ValidationError);
}

TEST_CASE("column mapping renames source headers") {
  std::istringstream map_in("# native export\nID\tid\nbody\ttext\n");
  ParseOptions opts;
  opts.mapping = ColumnMapping::parse(map_in);
  std::istringstream in("ID\tparliament\tdate\tbody\tTerm\nx1\tSI\t2019-03-04\thello\t8\n");
  auto f = read_speeches(in, SpeechFormat::tsv, opts);
  REQUIRE(f.speeches.size() == 1);
  CHECK(f.speeches[0].id == "x1");
  CHECK(f.speeches[0].text == "hello");
  CHECK(f.extra_columns == std::vector<std::string>{"Term"});
  CHECK(f.speeches[0].extras == std::vector<std::pair<std::string, std::string>>{{"Term", "8"}});
}

TEST_CASE("tsv round trip preserves every field including extras") {
  std::mt19937_64 gen(11);
  std::vector<Speech> speeches;
  for (int i = 0; i < 300; ++i) speeches.push_back(random_speech(gen, i));
  std::ostringstream out;
  SpeechWriter w(out, {"term", "agenda"});
  for (const auto& s : speeches) w.write(s);
  std::istringstream in(out.str());
  auto f = read_speeches(in, SpeechFormat::tsv);
  CHECK(f.errors.empty());
  CHECK(f.speeches == speeches);
}

TEST_CASE("jsonl round trip preserves every field including extras") {
  std::mt19937_64 gen(12);
  std::string text;
  std::vector<Speech> speeches;
  for (int i = 0; i < 200; ++i) {
    speeches.push_back(random_speech(gen, i));
    text += to_jsonl(speeches.back()) + "\n";
  }
  std::istringstream in(text);
  auto f = read_speeches(in, SpeechFormat::jsonl);
  CHECK(f.errors.empty());
  CHECK(f.speeches == speeches);
}

TEST_CASE("jsonl rejects non-objects and non-string canonical fields") {
  std::istringstream in(
      "[1,2]\n"
      "{\"id\":\"a\",\"parliament\":\"HR\",\"date\":\"2020-01-01\",\"text\":5}\n"
      "{\"id\":\"b\",\"parliament\":\"HR\",\"date\":\"2020-01-01\",\"text\":\"ok\"}\n");
  auto f = read_speeches(in, SpeechFormat::jsonl);
  REQUIRE(f.speeches.size() == 1);
  CHECK(f.speeches[0].id == "b");
  CHECK(f.errors.size() == 2);
}

TEST_CASE("escaped tabs and newlines survive in text") {
  std::istringstream in(std::string(kHeader) + row("a", "line one\\nline\\ttwo"));
  auto f = read_speeches(in, SpeechFormat::tsv);
  REQUIRE(f.speeches.size() == 1);
  CHECK(f.speeches[0].text == "line one\nline\ttwo");
}

TEST_CASE("sentence scores on the boundary are accepted") {
  std::istringstream in(
      "speech_id\tsentence_index\tsentence_text\tscore\tlabel3\n"
      "a\t0\tGood.\t5.0\tpositive\n"
      "a\t1\tBad.\t0\tnegative\n");
  auto s = read_sentences(in);
  REQUIRE(s.size() == 2);
  CHECK(s[0].score == 5.0);
  CHECK(s[0].label3 == Sentiment3::positive);
}

TEST_CASE("sentence score above 5 is out of range") {
  std::istringstream in(
      "speech_id\tsentence_index\tsentence_text\tscore\tlabel3\n"
      "a\t0\tToo good.\t5.1\tpositive\n");
  CHECK_THROWS_AS(read_sentences(in), ScoreOutOfRange);
}

TEST_CASE("four sentences of one speech keep their indices") {
  std::string text = "label3\tscore\tspeech_id\tsentence_index\tsentence_text\n";
  for (int i = 0; i < 4; ++i) {
    text += "neutral\t3\tsp\t" + std::to_string(i) + "\ts" + std::to_string(i) + "\n";
  }
  std::istringstream in(text);
  auto s = read_sentences(in);
  REQUIRE(s.size() == 4);
  for (std::uint32_t i = 0; i < 4; ++i) {
    CHECK(s[i].sentence_index == i);
    CHECK(s[i].speech_id == "sp");
  }
}

TEST_CASE("duplicate sentence keys are rejected") {
  std::istringstream in(
      "speech_id\tsentence_index\tsentence_text\tscore\tlabel3\n"
      "a\t0\tx\t1\tnegative\n"
      "a\t0\ty\t1\tnegative\n");
  CHECK_THROWS_AS(read_sentences(in), ValidationError);
}

TEST_CASE("malformed sentence rows are collected") {
  std::istringstream in(
      "speech_id\tsentence_index\tsentence_text\tscore\tlabel3\n"
      "a\t-1\tx\t1\tnegative\n"
      "a\t1\tx\tabc\tnegative\n"
      "a\t2\tx\t1\tangry\n"
      "a\t3\tx\t1\tneutral\n");
  SentenceReader r(in);
  SentenceSentiment s;
  int n = 0;
  while (r.next(s)) ++n;
  CHECK(n == 1);
  CHECK(r.errors().size() == 3);
}

}  // TEST_SUITE
