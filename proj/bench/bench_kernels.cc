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


// Serial reference versus OpenMP kernel for each parallel hot spot. Thread
// count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cctype>
#include <random>

#include "parltopic/analysis.h"
#include "parltopic/inference.h"
#include "parltopic/metrics.h"
#include "parltopic/mining.h"
#include "parltopic/synthetic.h"

using namespace parltopic;

namespace {

const std::vector<corpus::Speech>& speeches() {
  static const auto s = [] {
    synthetic::CorpusSpec spec;
    spec.parliament = "XX";
    spec.n_speeches = 20000;
    spec.seed = 4;
    return synthetic::generate(spec).speeches;
  }();
  return s;
}

const std::vector<std::string>& lowered() {
  static const auto t = [] {
    std::vector<std::string> out;
    for (const auto& s : speeches()) {
      std::string x = s.text_en.value_or(s.text);
      std::transform(x.begin(), x.end(), x.begin(), [](unsigned char c) { return std::tolower(c); });
      out.push_back(std::move(x));
    }
    return out;
  }();
  return t;
}

const std::vector<std::string>& keywords() {
  static const auto k = [] {
    std::vector<std::string> out;
    for (const auto& [kw, code] : synthetic::keyword_rules()) out.push_back(kw);
    return out;
  }();
  return k;
}

std::vector<inference::Prediction> predictions(std::size_t n) {
  std::mt19937_64 gen(1);
  const auto labels = capschema::Schema::builtin().by_code();
  std::vector<inference::Prediction> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].speech_id = "s" + std::to_string(i);
    out[i].label = labels[gen() % labels.size()];
    out[i].confidence = std::uniform_real_distribution<double>(0, 1)(gen);
  }
  return out;
}

template <auto Fn>
void BM_match_keywords(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(Fn(lowered(), keywords()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(lowered().size()));
}

template <auto Fn>
void BM_resolve_all(benchmark::State& state) {
  const auto preds = predictions(1'000'000);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(preds, inference::ThresholdPolicy{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(preds.size()));
}

template <auto Fn>
void BM_confusion(benchmark::State& state) {
  const auto preds = predictions(1'000'000);
  std::vector<capschema::CapLabel> gold;
  std::vector<capschema::FinalLabel> pred;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    gold.push_back(preds[(i * 7) % preds.size()].label);
    pred.push_back(inference::resolve(preds[i], {}));
  }
  const auto labels = capschema::Schema::builtin().by_code();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(gold, pred, labels, true));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gold.size()));
}

template <auto Fn>
void BM_accumulate(benchmark::State& state) {
  std::vector<assembly::EnrichedSpeech> rows;
  std::mt19937_64 gen(3);
  const auto labels = capschema::Schema::builtin().by_code();
  for (int rep = 0; rep < 10; ++rep) {
    for (const auto& s : speeches()) {
      assembly::EnrichedSpeech e;
      e.speech = s;
      e.topic = capschema::FinalLabel::cap(labels[gen() % labels.size()]);
      e.sentiment_score_mean = 3.0;
      rows.push_back(std::move(e));
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(Fn(rows, analysis::AnalysisFilter{}, capschema::Schema::builtin()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size()));
}

}  // namespace

BENCHMARK(BM_match_keywords<mining::serial::match_keywords>)->Name("match_keywords/serial");
BENCHMARK(BM_match_keywords<mining::match_keywords>)->Name("match_keywords/omp");
BENCHMARK(BM_resolve_all<inference::serial::resolve_all>)->Name("resolve_all/serial");
BENCHMARK(BM_resolve_all<inference::resolve_all>)->Name("resolve_all/omp");
BENCHMARK(BM_confusion<metrics::serial::confusion>)->Name("confusion/serial");
BENCHMARK(BM_confusion<metrics::confusion>)->Name("confusion/omp");
BENCHMARK(BM_accumulate<analysis::serial::accumulate>)->Name("accumulate/serial");
BENCHMARK(BM_accumulate<analysis::accumulate>)->Name("accumulate/omp");

BENCHMARK_MAIN();
