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

#include <sstream>

#include "parltopic/labeled.h"
#include "support/support.h"

using namespace parltopic;
using capschema::AnnotatorLabel;
using capschema::CapLabel;

TEST_SUITE("labeled") {

TEST_CASE("annotations round trip, including do-not-know and raw text") {
  std::vector<AnnotationRecord> recs = {
      {"a", AnnotatorLabel::cap(CapLabel(21)), LabelSource::teacher, "21"},
      {"b", AnnotatorLabel::do_not_know(), LabelSource::human, std::nullopt},
      {"c", AnnotatorLabel::cap(CapLabel(0)), LabelSource::gold, "Other.\n(sure)"}};
  std::ostringstream out;
  AnnotationWriter w(out);
  for (const auto& r : recs) w.write(r);
  std::istringstream in(out.str());
  auto back = read_annotations(in);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].speech_id == recs[i].speech_id);
    CHECK(back[i].label == recs[i].label);
    CHECK(back[i].source == recs[i].source);
    CHECK(back[i].raw_response == recs[i].raw_response);
  }
}

TEST_CASE("join drops do-not-know and unknown speeches, keeps annotation order") {
  std::vector<corpus::Speech> speeches = {testing::make_speech("s1"), testing::make_speech("s2"),
                                          testing::make_speech("s3")};
  std::vector<AnnotationRecord> recs = {
      {"s3", AnnotatorLabel::cap(CapLabel(3)), LabelSource::human, std::nullopt},
      {"s2", AnnotatorLabel::do_not_know(), LabelSource::human, std::nullopt},
      {"zz", AnnotatorLabel::cap(CapLabel(4)), LabelSource::human, std::nullopt},
      {"s1", AnnotatorLabel::cap(CapLabel(5)), LabelSource::human, std::nullopt}};
  auto joined = join_labeled(recs, speeches, "ann1");
  REQUIRE(joined.size() == 2);
  CHECK(joined[0].speech.id == "s3");
  CHECK(joined[0].label == CapLabel(3));
  CHECK(joined[0].annotator_id == "ann1");
  CHECK(joined[1].speech.id == "s1");
}

TEST_CASE("label sources parse") {
  CHECK(parse_label_source("gold") == LabelSource::gold);
  CHECK_FALSE(parse_label_source("robot"));
  CHECK(to_string(LabelSource::teacher) == "teacher");
}

}  // TEST_SUITE
