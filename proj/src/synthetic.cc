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

#include "parltopic/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "parltopic/capschema.h"
#include "parltopic/common.h"
#include "parltopic/rng.h"
#include "parltopic/tsv.h"

namespace parltopic::synthetic {

using corpus::Speech;

const std::vector<std::string>& default_parliaments() {
  static const std::vector<std::string> p = {"AT", "BA", "BE", "BG", "CZ", "DK", "EE", "ES",
                                             "ES-CT", "ES-GA", "ES-PV", "FI", "FR", "GB", "GR",
                                             "HR", "HU", "IS", "IT", "LV", "NL", "NO", "PL",
                                             "PT", "RS", "SE", "SI", "TR", "UA"};
  return p;
}

namespace {

const std::map<int, std::string>& keyword_table() {
  static const std::map<int, std::string> t = {
      {0, "point of order"},  {1, "inflation"},     {2, "discrimination"},
      {3, "hospital"},        {4, "farmers"},       {5, "wages"},
      {6, "schools"},         {7, "pollution"},     {8, "electricity"},
      {9, "migrants"},        {10, "railway"},      {12, "police"},
      {13, "pensions"},       {14, "housing"},      {15, "banking"},
      {16, "army"},           {17, "internet"},     {18, "tariffs"},
      {19, "diplomacy"},      {20, "civil servants"}, {21, "national park"},
      {23, "theatre"}};
  return t;
}

const std::vector<std::string>& filler() {
  static const std::vector<std::string> f = {
      "the",      "minister", "colleagues", "today",    "question",  "government",
      "proposal", "committee", "report",    "amendment", "we",       "must",
      "consider", "this",     "matter",     "important", "citizens", "country",
      "debate",   "vote",     "honourable", "member",    "believe",  "should",
      "support",  "oppose",   "draft",      "law",       "year",     "next",
      "clearly",  "regarding", "agenda",    "position",  "thank",    "you"};
  return f;
}

const std::vector<std::string>& first_names_f() {
  static const std::vector<std::string> n = {"Ana", "Eva", "Mia", "Ida", "Lea", "Nora", "Sara"};
  return n;
}
const std::vector<std::string>& first_names_m() {
  static const std::vector<std::string> n = {"Ivo", "Jan", "Luka", "Marc", "Olaf", "Petr", "Timo"};
  return n;
}

// A few fixed pseudo-language suffixes so `text` differs from `text_en`.
std::string native_word(const std::string& w, const std::string& parliament) {
  static const char* suffixes[] = {"a", "o", "en", "ik", "us", "ta", "e"};
  return w + suffixes[fnv1a64(parliament) % 7];
}

std::string words(Rng& rng, std::size_t n, const std::string* parliament) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    const auto& w = filler()[rng.below(filler().size())];
    out += parliament ? native_word(w, *parliament) : w;
  }
  return out;
}

corpus::Date random_date(Rng& rng, int year_min, int year_max) {
  corpus::Date d;
  d.year = year_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(year_max - year_min + 1)));
  d.month = 1 + static_cast<unsigned>(rng.below(12));
  d.day = 1 + static_cast<unsigned>(rng.below(28));
  return d;
}

corpus::Sentiment3 label_for(double score) {
  if (score < 2.5) return corpus::Sentiment3::negative;
  if (score > 3.5) return corpus::Sentiment3::positive;
  return corpus::Sentiment3::neutral;
}

}  // namespace

const std::string& topic_keyword(int code) {
  auto it = keyword_table().find(code);
  if (it == keyword_table().end()) throw UnknownCode(code);
  return it->second;
}

std::vector<std::pair<std::string, int>> keyword_rules() {
  std::vector<std::pair<std::string, int>> rules;
  rules.emplace_back(topic_keyword(capschema::kPublicLandsCode), capschema::kPublicLandsCode);
  for (const auto& [code, kw] : keyword_table()) {
    if (code != capschema::kPublicLandsCode) rules.emplace_back(kw, code);
  }
  return rules;
}

SyntheticCorpus generate(const CorpusSpec& spec) {
  if (spec.parliament.empty()) throw ValidationError("synthetic corpus needs a parliament code");
  if (spec.year_min > spec.year_max) throw ValidationError("synthetic corpus: bad year range");
  Rng rng(stream_seed(spec.seed, "synthetic:" + spec.parliament));

  // Per-parliament topic weights; Public Lands stays rare.
  const auto codes = capschema::Schema::builtin().by_code();
  std::vector<double> weights;
  double total = 0;
  for (auto c : codes) {
    double w = 1.0 + static_cast<double>(splitmix64(fnv1a64(spec.parliament) ^ static_cast<std::uint64_t>(c.code())) % 6);
    if (c.code() == capschema::kPublicLandsCode) w = 0.3;
    weights.push_back(w);
    total += w;
  }
  auto draw_code = [&] {
    double u = rng.unit() * total;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if ((u -= weights[i]) < 0) return codes[i].code();
    }
    return codes.back().code();
  };

  // A small roster of speakers with fixed gender and party.
  struct Speaker {
    std::string id, name;
    corpus::Gender gender;
    int party;
  };
  std::vector<Speaker> roster;
  for (int i = 0; i < 40; ++i) {
    Speaker s;
    double g = rng.unit();
    s.gender = g < spec.unknown_gender_fraction ? corpus::Gender::unknown
               : g < spec.unknown_gender_fraction + spec.female_fraction ? corpus::Gender::female
                                                                         : corpus::Gender::male;
    const auto& first = s.gender == corpus::Gender::female ? first_names_f() : first_names_m();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03d", i);
    s.id = spec.parliament + "-S" + buf;
    s.name = first[rng.below(first.size())] + " " + spec.parliament + buf;
    s.party = static_cast<int>(rng.below(6));
    roster.push_back(std::move(s));
  }

  SyntheticCorpus out;
  out.speeches.reserve(spec.n_speeches);
  out.topic_codes.reserve(spec.n_speeches);
  for (std::size_t i = 0; i < spec.n_speeches; ++i) {
    Speech s;
    char num[16];
    std::snprintf(num, sizeof num, "%06zu", i + 1);
    s.id = spec.parliament + "-" + num;
    s.parliament = spec.parliament;
    s.date = random_date(rng, spec.year_min, spec.year_max);
    const auto& sp = roster[rng.below(roster.size())];
    s.speaker_id = sp.id;
    s.speaker_name = sp.name;
    s.speaker_gender = sp.gender;
    s.speaker_role = rng.unit() < spec.chair_fraction ? corpus::Role::chairperson
                                                      : corpus::Role::regular;
    if (sp.party < 5) {
      s.party_id = spec.parliament + "-P" + std::to_string(sp.party);
      s.party_name = "Party " + std::to_string(sp.party) + " of " + spec.parliament;
      s.party_status = sp.party < 2 ? "coalition" : "opposition";
    }

    const int code = draw_code();
    const auto& kw = topic_keyword(code);
    std::string noise;
    if (rng.unit() < spec.noise_fraction) noise = topic_keyword(draw_code());
    const auto pre = 4 + rng.below(12);
    const auto post = 4 + rng.below(20);

    Rng text_rng(rng.next());
    Rng native_rng = text_rng;
    auto compose = [&](Rng& r, const std::string* parl) {
      std::string t = words(r, pre, parl) + " " + kw + " " + words(r, post, parl);
      if (!noise.empty()) t += " " + noise;
      return t;
    };
    s.text_en = compose(text_rng, nullptr);
    s.text = compose(native_rng, &spec.parliament);
    if (i % 97 == 5) s.text += "\nline\tbreak";

    out.speeches.push_back(std::move(s));
    out.topic_codes.push_back(code);
  }

  for (const auto& s : out.speeches) {
    if (rng.unit() >= spec.sentiment_fraction) continue;
    const auto n = 1 + rng.below(4);
    for (std::uint32_t k = 0; k < n; ++k) {
      corpus::SentenceSentiment st;
      st.speech_id = s.id;
      st.sentence_index = k;
      st.score = static_cast<double>(rng.below(501)) / 100.0;
      st.label3 = label_for(st.score);
      st.sentence_text = words(rng, 3 + rng.below(8), nullptr) + ".";
      out.sentences.push_back(std::move(st));
    }
  }
  return out;
}

FixtureFiles write_fixture(const std::filesystem::path& dir,
                           const std::vector<std::string>& parliaments,
                           std::size_t speeches_per_parliament, std::uint64_t seed) {
  FixtureFiles files;
  for (const auto& p : parliaments) {
    CorpusSpec spec;
    spec.parliament = p;
    spec.n_speeches = speeches_per_parliament;
    spec.seed = seed;
    auto corpus = generate(spec);

    auto speech_path = dir / (p + ".tsv");
    tsv::AtomicFile sf(speech_path);
    corpus::SpeechWriter writer(sf.stream());
    for (const auto& s : corpus.speeches) writer.write(s);
    sf.commit();

    auto sentence_path = dir / (p + "_sentences.tsv");
    tsv::AtomicFile tf(sentence_path);
    tf.stream() << tsv::join_row({"speech_id", "sentence_index", "sentence_text", "score", "label3"});
    for (const auto& st : corpus.sentences) {
      tf.stream() << tsv::join_row({st.speech_id, std::to_string(st.sentence_index),
                                    st.sentence_text, tsv::format_double(st.score),
                                    std::string(corpus::to_string(st.label3))});
    }
    tf.commit();

    files.speech_files.push_back(speech_path);
    files.sentence_files.push_back(sentence_path);
    files.speeches += corpus.speeches.size();
    files.sentences += corpus.sentences.size();
  }
  return files;
}

AugmentationFixture augmentation_fixture(std::size_t n_base, std::size_t n_accept,
                                         std::size_t n_over_cap, std::uint64_t seed) {
  AugmentationFixture fx;
  fx.spec = mining::KeywordSpec::builtin_public_lands();
  fx.spec.seed = seed;
  const int public_lands = capschema::kPublicLandsCode;
  const int agriculture = 4;
  fx.teacher_rules = {{"national park", public_lands}};
  fx.teacher_fallback = agriculture;

  Rng rng(stream_seed(seed, "augmentation"));
  auto make = [&](const std::string& id, const std::string& phrase) {
    Speech s;
    s.id = id;
    s.parliament = "XX";
    s.date = corpus::Date{2020, 3, 1};
    s.speaker_id = "XX-S1";
    s.speaker_name = "Speaker One";
    s.speaker_gender = corpus::Gender::female;
    s.speaker_role = corpus::Role::regular;
    auto body = words(rng, 6, nullptr);
    s.text_en = phrase.empty() ? body : body + " " + phrase + " " + words(rng, 4, nullptr);
    s.text = *s.text_en;
    return s;
  };
  auto id_of = [](const char* prefix, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%07zu", prefix, i);
    return std::string(buf);
  };

  // Training split: the base Public Lands examples plus other labels.
  for (std::size_t i = 0; i < n_base; ++i) {
    LabeledExample e;
    e.speech = make(id_of("train-pl-", i), "public land");
    e.label = capschema::CapLabel(public_lands);
    e.annotator_id = "fixture";
    fx.train.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < 4 * n_base; ++i) {
    LabeledExample e;
    e.speech = make(id_of("train-other-", i), "");
    e.label = capschema::CapLabel(1 + static_cast<int>(i % 10));
    e.annotator_id = "fixture";
    fx.train.push_back(std::move(e));
  }

  // Mining corpus: interleave accepted hits, rejected over-cap hits and
  // non-matching speeches.
  std::vector<Speech> accept, reject, plain;
  for (std::size_t i = 0; i < n_accept; ++i) accept.push_back(make(id_of("acc-", i), "national park"));
  for (std::size_t i = 0; i < n_over_cap; ++i) reject.push_back(make(id_of("graz-", i), "grazing rights"));
  for (std::size_t i = 0; i < n_accept; ++i) plain.push_back(make(id_of("plain-", i), ""));
  std::vector<Speech> all;
  for (auto* v : {&accept, &reject, &plain}) {
    for (auto& s : *v) all.push_back(std::move(s));
  }
  rng.shuffle(all);
  fx.corpus = std::move(all);
  return fx;
}

}  // namespace parltopic::synthetic
