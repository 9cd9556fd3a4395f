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

// Pipeline stages behind the subcommands. Each stage reads its inputs,
// writes under `Context::out`, and records a manifest.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/logger.h>

#include "parltopic/analysis.h"
#include "parltopic/inference.h"
#include "parltopic/teacher.h"

namespace parltopic::cli {

namespace fs = std::filesystem;

struct Context {
  fs::path out;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::shared_ptr<spdlog::logger> log;
};

struct TeacherArgs {
  /// mock-keyword | mock-hash | mock-constant | http
  std::string kind = "mock-keyword";
  std::string endpoint;
  std::string model;
  std::string token;  // from the environment, never written to manifests
  std::string constant_reply = "1";
  int timeout_s = 60;
  std::size_t max_in_flight = 64;
  int attempts = 3;
  int base_delay_ms = 500;
  double usd_per_1k_prompt = 0.0;
  double usd_per_1k_response = 0.0;
  fs::path prompt;
  fs::path labels;

  nlohmann::json describe() const;
};

struct StudentArgs {
  /// mock | process | http
  std::string kind = "mock";
  std::string command;
  std::string endpoint;
  int timeout_s = 120;
  std::size_t batch_size = 32;
  std::size_t max_concurrent = 4;
  int attempts = 3;
  double tau = 0.60;

  nlohmann::json describe() const;
};

/// Speech files in a directory: *.tsv and *.jsonl, minus *_sentences.tsv,
/// sorted by name.
std::vector<fs::path> discover_speech_files(const fs::path& dir);
/// Parliament (corpus) code of a speech file: its stem.
std::string corpus_code(const fs::path& file);

struct SampleArgs {
  std::vector<fs::path> corpora;
  std::size_t train_per_corpus = 1000;
  std::size_t dev_per_corpus = 200;
  std::size_t pool_per_corpus = 0;
};

struct SampleOutputs {
  fs::path train, dev, pool;
  std::size_t n_train = 0, n_dev = 0, n_pool = 0;
};

SampleOutputs run_sample(const Context& ctx, const SampleArgs& args);

struct TestSetArgs {
  fs::path pool_speeches;
  fs::path pool_labels;
  std::vector<fs::path> exclude;
  std::size_t per_label = 40;
};

struct TestSetOutputs {
  fs::path speeches, labels;
  std::size_t n = 0;
  std::size_t shortfall_labels = 0;
};

TestSetOutputs run_test_set(const Context& ctx, const TestSetArgs& args);

struct AnnotateArgs {
  fs::path speeches;
  std::string name;  // output stem; defaults to the input stem
  TeacherArgs teacher;
};

struct AnnotateOutputs {
  fs::path labels, failures;
  std::size_t labeled = 0, failed = 0;
};

AnnotateOutputs run_annotate(const Context& ctx, const AnnotateArgs& args);

struct MineArgs {
  std::vector<fs::path> corpora;
  fs::path train_speeches;
  fs::path train_labels;
  std::vector<fs::path> exclude;
  fs::path keywords;  // empty: shipped Public Lands list
  int target_code = 21;
  std::size_t cap_per_keyword = 2000;
  TeacherArgs teacher;
};

struct MineOutputs {
  fs::path candidates, accepted, merged_speeches, merged_labels;
  std::size_t n_candidates = 0, n_accepted = 0, n_target_before = 0, n_target_after = 0;
};

MineOutputs run_mine(const Context& ctx, const MineArgs& args);

struct AgreeArgs {
  /// name=path pairs, or bare paths named by their stem.
  std::vector<std::string> annotations;
};

nlohmann::json run_agree(const Context& ctx, const AgreeArgs& args);

struct EvaluateArgs {
  fs::path gold;
  std::vector<fs::path> predictions;  // one file per run
  std::string name = "eval";
};

nlohmann::json run_evaluate(const Context& ctx, const EvaluateArgs& args);

struct ClassifyArgs {
  std::vector<fs::path> inputs;
  StudentArgs student;
  /// Manifest name; lets one run classify several input sets.
  std::string stage = "classify";
};

struct ClassifyOutputs {
  std::vector<fs::path> predictions;
  inference::CoverageReport coverage;
};

ClassifyOutputs run_classify(const Context& ctx, const ClassifyArgs& args);

struct AssembleArgs {
  fs::path corpora;
  fs::path predictions;  // directory of <P>.predictions.tsv
  fs::path partyfacts;   // empty: shipped example table
  fs::path vdem;         // empty: shipped example table
  assembly::SentimentCuts cuts;
};

struct AssembleOutputs {
  std::vector<fs::path> files;
  std::size_t speeches = 0, sentences = 0;
};

AssembleOutputs run_assemble(const Context& ctx, const AssembleArgs& args);

struct AnalyzeArgs {
  fs::path dataset;
  std::vector<std::string> metrics{"topics", "sentiment", "gender"};
  analysis::AnalysisFilter filter;
};

struct AnalyzeOutputs {
  std::vector<analysis::TopicMatrix> matrices;
  std::vector<fs::path> files;
};

AnalyzeOutputs run_analyze(const Context& ctx, const AnalyzeArgs& args);

struct PipelineArgs {
  fs::path corpora;
  SampleArgs sample;  // corpora filled from the directory
  std::size_t pool_per_corpus = 100;
  std::size_t test_per_label = 40;
  TeacherArgs teacher;
  StudentArgs student;
  fs::path keywords;
  std::size_t cap_per_keyword = 2000;
  fs::path partyfacts;
  fs::path vdem;
  assembly::SentimentCuts cuts;
  analysis::AnalysisFilter filter;
};

nlohmann::json run_pipeline(const Context& ctx, const PipelineArgs& args);

}  // namespace parltopic::cli
