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

#include "parltopic/sampling.h"

#include <algorithm>

#include "parltopic/common.h"
#include "parltopic/rng.h"
#include "parltopic/tsv.h"

namespace parltopic::sampling {

namespace {

struct Positioned {
  std::size_t pos;
  corpus::Speech speech;
};

bool eligible(const corpus::Speech& s) { return !tsv::trim(s.text).empty(); }

std::vector<corpus::Speech> in_stream_order(std::vector<Positioned> items) {
  std::sort(items.begin(), items.end(),
            [](const Positioned& a, const Positioned& b) { return a.pos < b.pos; });
  std::vector<corpus::Speech> out;
  out.reserve(items.size());
  for (auto& p : items) out.push_back(std::move(p.speech));
  return out;
}

}  // namespace

SpeechSource source_of(std::span<const corpus::Speech> speeches) {
  return [speeches, i = std::size_t{0}](corpus::Speech& out) mutable {
    if (i == speeches.size()) return false;
    out = speeches[i++];
    return true;
  };
}

CorpusSample corpus_sample(const SpeechSource& speeches, std::string_view corpus_code,
                           const SamplePlan& plan) {
  const std::size_t want = plan.n_train_per_corpus + plan.n_dev_per_corpus;
  Reservoir<Positioned> reservoir(want,
                                  stream_seed(plan.seed, "corpus:" + std::string(corpus_code)));
  corpus::Speech s;
  std::size_t pos = 0;
  while (speeches(s)) {
    if (!eligible(s)) continue;
    reservoir.offer({pos++, s});
  }
  if (reservoir.seen() < want) throw InsufficientCorpus(reservoir.seen(), want);

  CorpusSample out;
  out.eligible = reservoir.seen();
  auto& rng = reservoir.rng();
  auto items = std::move(reservoir).take();
  rng.shuffle(items);
  std::vector<Positioned> dev(std::make_move_iterator(items.begin() + plan.n_train_per_corpus),
                              std::make_move_iterator(items.end()));
  items.resize(plan.n_train_per_corpus);
  out.train = in_stream_order(std::move(items));
  out.dev = in_stream_order(std::move(dev));
  return out;
}

std::vector<corpus::Speech> random_pool(const SpeechSource& speeches, const IdSet& exclude,
                                        std::size_t n, std::uint64_t seed,
                                        std::string_view key) {
  Reservoir<Positioned> reservoir(n, stream_seed(seed, "pool:" + std::string(key)));
  corpus::Speech s;
  std::size_t pos = 0;
  while (speeches(s)) {
    if (!eligible(s) || exclude.contains(s.id)) continue;
    reservoir.offer({pos++, s});
  }
  return in_stream_order(std::move(reservoir).take());
}

BalancedSample balanced_test_sample(const std::vector<LabeledExample>& pool,
                                    std::size_t per_label, const IdSet& exclude_ids,
                                    std::uint64_t seed, const capschema::Schema& schema) {
  BalancedSample out;
  if (per_label == 0) return out;
  for (auto label : schema.by_code()) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].label == label && !exclude_ids.contains(pool[i].speech.id)) {
        candidates.push_back(i);
      }
    }
    if (candidates.size() < per_label) {
      out.shortfalls.push_back({label, candidates.size(), per_label});
    } else {
      // Partial Fisher-Yates: the first per_label slots become the sample.
      Rng rng(stream_seed(seed, "test:" + std::to_string(label.code())));
      for (std::size_t i = 0; i < per_label; ++i) {
        std::swap(candidates[i], candidates[i + rng.below(candidates.size() - i)]);
      }
      candidates.resize(per_label);
      std::sort(candidates.begin(), candidates.end());
    }
    for (auto i : candidates) out.examples.push_back(pool[i]);
  }
  return out;
}

}  // namespace parltopic::sampling
