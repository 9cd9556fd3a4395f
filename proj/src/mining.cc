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

#include "parltopic/mining.h"

#include <algorithm>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "parltopic/common.h"
#include "parltopic/resources.h"
#include "parltopic/rng.h"
#include "parltopic/tsv.h"

namespace parltopic::mining {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c == '_' || c >= 0x80;
}

KeywordHits hits_for(std::string_view text, std::span<const std::string> keywords) {
  KeywordHits hits;
  for (std::size_t k = 0; k < keywords.size(); ++k) {
    if (contains_phrase(text, keywords[k])) hits.push_back(static_cast<std::uint32_t>(k));
  }
  return hits;
}

}  // namespace

void KeywordSpec::validate() const {
  if (keywords.empty()) throw ValidationError("keyword list is empty");
  for (const auto& k : keywords) {
    if (tsv::trim(k).empty()) throw ValidationError("blank keyword");
  }
}

KeywordSpec KeywordSpec::parse(std::istream& in, capschema::CapLabel target) {
  KeywordSpec spec;
  spec.target_label = target;
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
    auto code = cols.size() == 2 ? tsv::parse_int(cols[0]) : std::nullopt;
    if (!code) {
      throw ValidationError("keyword file line " + std::to_string(lines.line_no()) +
                            ": expected label_code<TAB>keyword");
    }
    if (*code != target.code()) continue;
    auto kw = ascii_lower(tsv::trim(tsv::unescape(cols[1])));
    if (std::find(spec.keywords.begin(), spec.keywords.end(), kw) == spec.keywords.end()) {
      spec.keywords.push_back(std::move(kw));
    }
  }
  spec.validate();
  return spec;
}

KeywordSpec KeywordSpec::load(const std::filesystem::path& path, capschema::CapLabel target) {
  auto in = tsv::open_input(path);
  return parse(in, target);
}

KeywordSpec KeywordSpec::builtin_public_lands() {
  std::istringstream in{std::string(resources::public_lands_keywords_tsv())};
  return parse(in, capschema::CapLabel(capschema::kPublicLandsCode));
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool contains_phrase(std::string_view text, std::string_view phrase) {
  if (phrase.empty()) return false;
  for (auto pos = text.find(phrase); pos != std::string_view::npos;
       pos = text.find(phrase, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_byte(static_cast<unsigned char>(text[pos - 1]));
    const auto end = pos + phrase.size();
    const bool right_ok =
        end == text.size() || !is_word_byte(static_cast<unsigned char>(text[end]));
    if (left_ok && right_ok) return true;
  }
  return false;
}

std::vector<KeywordHits> match_keywords(std::span<const std::string> lowered_texts,
                                        std::span<const std::string> keywords) {
  std::vector<KeywordHits> out(lowered_texts.size());
  const auto n = static_cast<std::ptrdiff_t>(lowered_texts.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = hits_for(lowered_texts[i], keywords);
  }
  return out;
}

namespace serial {

std::vector<KeywordHits> match_keywords(std::span<const std::string> lowered_texts,
                                        std::span<const std::string> keywords) {
  std::vector<KeywordHits> out;
  out.reserve(lowered_texts.size());
  for (const auto& t : lowered_texts) out.push_back(hits_for(t, keywords));
  return out;
}

}  // namespace serial

MiningResult mine_candidates(const sampling::SpeechSource& speeches, const KeywordSpec& spec,
                             std::size_t chunk) {
  spec.validate();
  chunk = std::max<std::size_t>(1, chunk);
  struct Hit {
    std::size_t pos;
    std::shared_ptr<const corpus::Speech> speech;
  };
  std::vector<Reservoir<Hit>> reservoirs;
  for (const auto& kw : spec.keywords) {
    reservoirs.emplace_back(spec.cap_per_keyword, stream_seed(spec.seed, "keyword:" + kw));
  }

  MiningResult result;
  result.matches_per_keyword.assign(spec.keywords.size(), 0);
  std::vector<std::shared_ptr<const corpus::Speech>> batch;
  std::vector<std::string> lowered;
  std::size_t pos = 0;
  bool more = true;
  while (more) {
    batch.clear();
    lowered.clear();
    corpus::Speech s;
    while (batch.size() < chunk && (more = speeches(s))) {
      ++result.scanned;
      if (!s.text_en || tsv::trim(*s.text_en).empty()) {
        ++result.skipped_no_english;
        continue;
      }
      lowered.push_back(ascii_lower(*s.text_en));
      batch.push_back(std::make_shared<const corpus::Speech>(std::move(s)));
    }
    auto hits = match_keywords(lowered, spec.keywords);
    for (std::size_t i = 0; i < batch.size(); ++i, ++pos) {
      for (auto k : hits[i]) {
        ++result.matches_per_keyword[k];
        reservoirs[k].offer({pos, batch[i]});
      }
    }
  }

  std::vector<Hit> all;
  for (auto& r : reservoirs) {
    result.taken_per_keyword.push_back(r.items().size());
    all.insert(all.end(), r.items().begin(), r.items().end());
  }
  std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) { return a.pos < b.pos; });
  std::unordered_set<std::string_view> seen;
  for (const auto& h : all) {
    if (seen.insert(h.speech->id).second) result.candidates.push_back(*h.speech);
  }
  return result;
}

FilterResult filter_by_teacher(std::span<const corpus::Speech> candidates,
                               const KeywordSpec& spec, teacher::TeacherBackend& backend,
                               const capschema::PromptTemplate& tmpl,
                               const teacher::AnnotateOptions& options) {
  FilterResult out;
  out.candidates = candidates.size();
  auto run = teacher::annotate_all(candidates, tmpl, backend, options);
  out.stats = run.stats;
  out.failures = std::move(run.failures);
  for (auto& e : run.labeled) {
    if (e.label == spec.target_label) out.accepted.push_back(std::move(e));
  }
  return out;
}

MergeResult merge_augmentation(const std::vector<LabeledExample>& train,
                               const std::vector<LabeledExample>& accepted) {
  MergeResult out;
  out.merged.reserve(train.size() + accepted.size());
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& e : train) {
    if (index.emplace(e.speech.id, out.merged.size()).second) out.merged.push_back(e);
  }
  for (const auto& e : accepted) {
    auto [it, inserted] = index.emplace(e.speech.id, out.merged.size());
    if (inserted) {
      out.merged.push_back(e);
      ++out.added;
    } else if (out.merged[it->second].label != e.label) {
      out.conflicts.push_back({e.speech.id, out.merged[it->second].label, e.label});
    }
  }
  return out;
}

}  // namespace parltopic::mining
