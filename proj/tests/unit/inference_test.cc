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
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "parltopic/common.h"
#include "parltopic/inference.h"
#include "parltopic/student_backends.h"
#include "support/support.h"

using namespace parltopic;
using namespace parltopic::inference;
using capschema::CapLabel;
using capschema::FinalLabel;

namespace {

std::vector<corpus::Speech> speeches(std::size_t n) {
  std::vector<corpus::Speech> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(testing::make_speech("s" + std::to_string(i)));
  return out;
}

ClassifyOptions fast() {
  ClassifyOptions o;
  o.base_delay = std::chrono::milliseconds(0);
  return o;
}

std::vector<ClassifiedSpeech> classify_all(const std::vector<corpus::Speech>& s,
                                           StudentBackend& student, const ClassifyOptions& o,
                                           ClassifyStats* stats = nullptr) {
  std::vector<ClassifiedSpeech> out;
  auto st = batch_classify(sampling::source_of(s), student, o,
                           [&](ClassifiedSpeech&& c) { out.push_back(std::move(c)); });
  if (stats) *stats = st;
  return out;
}

std::size_t mix_count(const std::vector<Prediction>& preds, double tau) {
  std::size_t n = 0;
  for (const auto& l : resolve_all(preds, ThresholdPolicy{tau})) n += l.is_mix();
  return n;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("confidence below tau becomes Mix, at tau keeps the label") {
  const ThresholdPolicy policy{0.60};
  CHECK(resolve({"a", CapLabel(3), 0.59}, policy) == FinalLabel::mix());
  CHECK(resolve({"a", CapLabel(3), 0.60}, policy) == FinalLabel::cap(CapLabel(3)));
  for (double tau : {0.0, 0.3, 0.6, 1.0}) {
    CHECK(resolve({"a", CapLabel(0), 1.0}, ThresholdPolicy{tau}) == FinalLabel::cap(CapLabel(0)));
  }
}

TEST_CASE("tau outside [0, 1] is rejected") {
  CHECK_THROWS_AS(ThresholdPolicy{1.5}.validate(), ValidationError);
  CHECK_THROWS_AS(ThresholdPolicy{-0.1}.validate(), ValidationError);
  CHECK_NOTHROW(ThresholdPolicy{}.validate());
  CHECK(ThresholdPolicy{}.tau == 0.60);
}

TEST_CASE("Mix count is monotone in tau and no label survives below tau") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int set = 0; set < 100; ++set) {
    std::vector<Prediction> preds;
    for (int i = 0; i < 200; ++i) preds.push_back({"p", CapLabel(1 + i % 10), u(gen)});
    std::size_t previous = 0;
    for (int k = 0; k <= 20; ++k) {
      const double tau = k / 20.0;
      auto labels = resolve_all(preds, ThresholdPolicy{tau});
      std::size_t mixes = 0;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        if (labels[i].is_mix()) {
          ++mixes;
        } else {
          CHECK(preds[i].confidence >= tau);
        }
      }
      CHECK(mixes >= previous);
      previous = mixes;
    }
  }
}

TEST_CASE("parallel resolve equals serial resolve") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Prediction> preds;
  for (int i = 0; i < 50000; ++i) preds.push_back({"p", CapLabel(1 + i % 10), u(gen)});
  CHECK(resolve_all(preds, {}) == serial::resolve_all(preds, {}));
  CHECK(mix_count(preds, 0.0) == 0);
}

TEST_CASE("constant confident student yields no Mix") {
  auto s = speeches(500);
  auto student = MockStudent::constant(3, 0.7);
  ClassifyStats st;
  auto out = classify_all(s, student, fast(), &st);
  REQUIRE(out.size() == 500);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].speech_id == s[i].id);
    CHECK(out[i].label == FinalLabel::cap(CapLabel(3)));
  }
  CHECK(st.mix == 0);
  CHECK(st.batches == (500 + 31) / 32);
}

TEST_CASE("uniform confidences give the expected Mix fraction") {
  auto s = speeches(100000);
  auto student = MockStudent::uniform(5, 77);
  std::vector<ClassifiedSpeech> out;
  auto opts = fast();
  opts.batch_size = 256;
  auto st = batch_classify(sampling::source_of(s), student, opts,
                           [&](ClassifiedSpeech&& c) { out.push_back(std::move(c)); });
  auto cov = coverage_report(out);
  CHECK(cov.n == 100000);
  CHECK(std::abs(cov.mix_fraction - 0.60) <= 0.01);
  CHECK(st.mix == cov.mix);
}

TEST_CASE("per-item failures become flagged Mix with confidence 0") {
  auto s = speeches(40);
  FunctionStudent student([](std::span<const StudentRequest> batch) {
    std::vector<StudentResult> out;
    for (const auto& r : batch) {
      StudentResult x;
      x.id = r.id;
      if (r.id == "s1") continue;  // missing answer
      if (r.id == "s2") {
        x.error = "model exploded";
      } else if (r.id == "s3") {
        x.label_code = 11;
        x.confidence = 0.9;
      } else if (r.id == "s4") {
        x.label_code = 3;
        x.confidence = 1.5;
      } else {
        x.label_code = 3;
        x.confidence = 0.9;
      }
      out.push_back(x);
    }
    std::reverse(out.begin(), out.end());  // answers matched by id, not position
    return out;
  });
  ClassifyStats st;
  auto out = classify_all(s, student, fast(), &st);
  REQUIRE(out.size() == 40);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].speech_id == s[i].id);
  for (int i : {1, 2, 3, 4}) {
    CAPTURE(i);
    CHECK(out[i].failed);
    CHECK(out[i].label.is_mix());
    CHECK(out[i].confidence == 0.0);
    CHECK_FALSE(out[i].failure.empty());
  }
  CHECK_FALSE(out[5].failed);
  CHECK(out[5].raw_label == CapLabel(3));
  CHECK(st.failed == 4);
  CHECK(st.mix == 4);
}

TEST_CASE("failed calls are retried before items fail") {
  auto s = speeches(64);
  std::atomic<int> calls{0};
  auto inner = MockStudent::constant(6, 0.8);
  FunctionStudent flaky([&](std::span<const StudentRequest> batch) {
    if (calls++ % 2 == 0) throw StudentCallError("timeout");
    return inner.predict(batch);
  });
  auto opts = fast();
  opts.max_concurrent = 1;
  ClassifyStats st;
  auto out = classify_all(s, flaky, opts, &st);
  CHECK(st.failed == 0);
  CHECK(st.retries == 2);
  CHECK(out.size() == 64);
}

TEST_CASE("an unreachable student aborts after the budget") {
  auto s = speeches(1000);
  FunctionStudent dead([](std::span<const StudentRequest>) -> std::vector<StudentResult> {
    throw StudentCallError("connection refused");
  });
  auto opts = fast();
  opts.max_attempts = 2;
  opts.unavailable_budget = 3;
  std::size_t emitted = 0;
  CHECK_THROWS_AS(batch_classify(sampling::source_of(s), dead, opts,
                                 [&](ClassifiedSpeech&&) { ++emitted; }),
                  StudentUnavailable);
  CHECK(emitted == 3 * 32);
}

TEST_CASE("coverage of a 90/10 fixture is exact") {
  std::vector<ClassifiedSpeech> v(100);
  for (int i = 0; i < 100; ++i) {
    v[i].speech_id = std::to_string(i);
    v[i].label = i < 90 ? FinalLabel::cap(CapLabel(1 + i % 5)) : FinalLabel::mix();
  }
  auto r = coverage_report(v);
  CHECK(r.kept_fraction == 0.90);
  CHECK(r.mix_fraction == 0.10);
  CHECK(r.per_label_counts.at(1) == 18);
  CHECK_FALSE(r.empty());
}

TEST_CASE("coverage of an empty stream is flagged") {
  auto r = coverage_report({});
  CHECK(r.empty());
  CHECK(r.kept_fraction == 0.0);
  CHECK(r.mix_fraction == 0.0);
}

TEST_CASE("coverage counters merge") {
  CoverageCounter a, b, all;
  for (int i = 0; i < 30; ++i) {
    auto l = i % 3 == 0 ? FinalLabel::mix() : FinalLabel::cap(CapLabel(i % 4));
    (i < 12 ? a : b).add(l);
    all.add(l);
  }
  a.merge(b);
  auto x = a.report(), y = all.report();
  CHECK(x.n == y.n);
  CHECK(x.mix == y.mix);
  CHECK(x.per_label_counts == y.per_label_counts);
}

TEST_CASE("predictions tsv round trip") {
  std::ostringstream out;
  PredictionWriter w(out);
  w.write("a", FinalLabel::cap(CapLabel(21)), 0.8125);
  w.write("b", FinalLabel::mix(), 0.1);
  w.write("c\td", FinalLabel::cap(CapLabel(0)), 1.0);
  CHECK(out.str().rfind("speech_id\tlabel_code\tconfidence\na\t21\t0.8125\nb\tMIX\t0.1\n", 0) == 0);
  std::istringstream in(out.str());
  auto rows = read_predictions(in);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].label == FinalLabel::cap(CapLabel(21)));
  CHECK(rows[0].confidence == 0.8125);
  CHECK(rows[1].label.is_mix());
  CHECK(rows[2].speech_id == "c\td");
}

TEST_CASE("predictions with bad labels or confidences are rejected") {
  std::istringstream bad_label("speech_id\tlabel_code\tconfidence\na\t11\t0.5\n");
  CHECK_THROWS_AS(read_predictions(bad_label), UnknownLabel);
  std::istringstream bad_conf("speech_id\tlabel_code\tconfidence\na\t1\t1.5\n");
  CHECK_THROWS_AS(read_predictions(bad_conf), ValidationError);
}

TEST_CASE("wire objects parse leniently into error results") {
  auto ok = student_result_from_json(nlohmann::json::parse(
      R"({"id":"x","label_code":7,"confidence":0.75})"));
  CHECK(ok.ok());
  CHECK(ok.label_code == 7);
  CHECK(ok.confidence == 0.75);
  auto err = student_result_from_json(nlohmann::json::parse(R"({"id":"x","error":"boom"})"));
  CHECK_FALSE(err.ok());
  CHECK(err.error == "boom");
  auto junk = student_result_from_json(nlohmann::json::parse(R"({"id":"x","label_code":"7"})"));
  CHECK_FALSE(junk.ok());
  CHECK_FALSE(junk.error.empty());
  CHECK(to_json(StudentRequest{"i", "t"}).dump() == R"({"id":"i","text":"t"})");
}

TEST_CASE("hashed confidence is uniform-looking and stable") {
  CHECK(MockStudent::hashed_confidence("abc", 1) == MockStudent::hashed_confidence("abc", 1));
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    double c = MockStudent::hashed_confidence("id" + std::to_string(i), 3);
    REQUIRE(c >= 0.0);
    REQUIRE(c < 1.0);
    sum += c;
  }
  CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.02));
}

}  // TEST_SUITE
