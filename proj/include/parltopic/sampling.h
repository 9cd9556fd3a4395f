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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "parltopic/capschema.h"
#include "parltopic/corpus.h"
#include "parltopic/labeled.h"

namespace parltopic::sampling {

/// Pull-style speech stream: fills the argument and returns true, or
/// returns false at the end.
using SpeechSource = std::function<bool(corpus::Speech&)>;

SpeechSource source_of(std::span<const corpus::Speech> speeches);

struct SamplePlan {
  std::size_t n_train_per_corpus = 1000;
  std::size_t n_dev_per_corpus = 200;
  std::uint64_t seed = 0;
};

struct CorpusSample {
  std::vector<corpus::Speech> train;
  std::vector<corpus::Speech> dev;
  std::size_t eligible = 0;
};

/// Uniform train/dev split without replacement for one corpus. A single
/// reservoir of n_train + n_dev speeches is drawn with a generator keyed by
/// (seed, corpus code), shuffled, and cut. Both lists keep stream order.
///
/// Throws InsufficientCorpus when fewer eligible (non-blank) speeches exist.
CorpusSample corpus_sample(const SpeechSource& speeches, std::string_view corpus_code,
                           const SamplePlan& plan);

using IdSet = std::unordered_set<std::string>;

/// Uniform sample of `n` eligible speeches not in `exclude`, keyed by
/// (seed, key). Returns fewer when the stream runs short.
std::vector<corpus::Speech> random_pool(const SpeechSource& speeches, const IdSet& exclude,
                                        std::size_t n, std::uint64_t seed,
                                        std::string_view key);

struct Shortfall {
  capschema::CapLabel label;
  std::size_t available = 0;
  std::size_t requested = 0;
};

struct BalancedSample {
  std::vector<LabeledExample> examples;
  std::vector<Shortfall> shortfalls;
};

/// For each schema label (in code order), min(per_label, available) pool
/// examples drawn uniformly from those whose id is not excluded. Shortfalls
/// are reported rather than raised.
BalancedSample balanced_test_sample(const std::vector<LabeledExample>& pool,
                                    std::size_t per_label, const IdSet& exclude_ids,
                                    std::uint64_t seed,
                                    const capschema::Schema& schema = capschema::Schema::builtin());

}  // namespace parltopic::sampling
