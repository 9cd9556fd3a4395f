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

// Deterministic synthetic corpora for tests, benchmarks and demos.
//
// Each speech is built around one topic keyword (see topic_keyword) placed
// in both `text` and `text_en`, surrounded by neutral filler. The mock
// teacher and mock student are driven by the same keyword table, so their
// outputs correlate with the generating topic without being identical to
// it.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "parltopic/corpus.h"
#include "parltopic/labeled.h"
#include "parltopic/mining.h"

namespace parltopic::synthetic {

/// The 29 parliament codes of the default fixture.
const std::vector<std::string>& default_parliaments();

/// Lowercase English marker phrase for a label code.
const std::string& topic_keyword(int code);
/// (keyword, code) for every label, Public Lands first.
std::vector<std::pair<std::string, int>> keyword_rules();

struct CorpusSpec {
  std::string parliament;
  std::size_t n_speeches = 1600;
  std::uint64_t seed = 0;
  int year_min = 2015;
  int year_max = 2022;
  double chair_fraction = 0.08;
  double female_fraction = 0.35;
  double unknown_gender_fraction = 0.04;
  /// Share of speeches that carry a second, distracting topic keyword.
  double noise_fraction = 0.12;
  /// Share of speeches with sentence-level sentiment rows.
  double sentiment_fraction = 0.9;
};

struct SyntheticCorpus {
  std::vector<corpus::Speech> speeches;  // sorted by id
  std::vector<corpus::SentenceSentiment> sentences;  // sorted by (id, index)
  std::vector<int> topic_codes;  // generating topic, parallel to speeches
};

SyntheticCorpus generate(const CorpusSpec& spec);

struct FixtureFiles {
  std::vector<std::filesystem::path> speech_files;
  std::vector<std::filesystem::path> sentence_files;
  std::size_t speeches = 0;
  std::size_t sentences = 0;
};

/// Writes `<dir>/<P>.tsv` and `<dir>/<P>_sentences.tsv` per parliament.
FixtureFiles write_fixture(const std::filesystem::path& dir,
                           const std::vector<std::string>& parliaments,
                           std::size_t speeches_per_parliament, std::uint64_t seed);

/// A mining scenario with a known outcome: `n_base` Public Lands examples
/// in the training split, exactly `n_accept` candidates the keyword mock
/// teacher labels Public Lands, and one keyword matched by `n_over_cap`
/// speeches that the teacher rejects.
struct AugmentationFixture {
  std::vector<LabeledExample> train;
  std::vector<corpus::Speech> corpus;
  mining::KeywordSpec spec;
  std::vector<std::pair<std::string, int>> teacher_rules;
  int teacher_fallback = 0;
};

AugmentationFixture augmentation_fixture(std::size_t n_base = 145, std::size_t n_accept = 779,
                                         std::size_t n_over_cap = 2500, std::uint64_t seed = 1);

}  // namespace parltopic::synthetic
