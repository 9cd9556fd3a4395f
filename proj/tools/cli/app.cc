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

#include <omp.h>

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "cli.h"
#include "parltopic/common.h"
#include "stages.h"

namespace parltopic::cli {

namespace {

constexpr const char* kTokenEnv = "PARLTOPIC_TEACHER_TOKEN";

struct Globals {
  std::string out = "parltopic-out";
  std::uint64_t seed = 1;
  int jobs = 0;
  std::string log_level = "info";
};

void add_teacher_options(CLI::App* sub, TeacherArgs& t) {
  sub->add_option("--teacher", t.kind, "mock-keyword, mock-hash, mock-constant or http")
      ->check(CLI::IsMember({"mock-keyword", "mock-hash", "mock-constant", "http"}))
      ->capture_default_str();
  sub->add_option("--teacher-endpoint", t.endpoint, "http://host:port/path of the teacher service");
  sub->add_option("--teacher-model", t.model, "Model name sent to the teacher service");
  sub->add_option("--teacher-reply", t.constant_reply, "Reply of the mock-constant teacher");
  sub->add_option("--teacher-timeout", t.timeout_s, "Per-request timeout in seconds")->capture_default_str();
  sub->add_option("--max-in-flight", t.max_in_flight, "Concurrent teacher requests")->capture_default_str();
  sub->add_option("--teacher-attempts", t.attempts, "Attempts per item")->capture_default_str();
  sub->add_option("--teacher-delay-ms", t.base_delay_ms, "Base retry delay")->capture_default_str();
  sub->add_option("--usd-per-1k-prompt", t.usd_per_1k_prompt, "Prompt price for the cost estimate");
  sub->add_option("--usd-per-1k-response", t.usd_per_1k_response, "Response price for the cost estimate");
  sub->add_option("--prompt", t.prompt, "Prompt template file")->check(CLI::ExistingFile);
  sub->add_option("--labels", t.labels, "Label table (code, name, description)")->check(CLI::ExistingFile);
}

void add_student_options(CLI::App* sub, StudentArgs& s) {
  sub->add_option("--student", s.kind, "mock, process or http")
      ->check(CLI::IsMember({"mock", "process", "http"}))
      ->capture_default_str();
  sub->add_option("--student-cmd", s.command, "Command speaking JSON lines on stdin/stdout");
  sub->add_option("--student-endpoint", s.endpoint, "http://host:port/path of the student service");
  sub->add_option("--student-timeout", s.timeout_s, "HTTP timeout in seconds")->capture_default_str();
  sub->add_option("--batch-size", s.batch_size, "Speeches per student call")->capture_default_str();
  sub->add_option("--concurrency", s.max_concurrent, "Concurrent student calls")->capture_default_str();
  sub->add_option("--student-attempts", s.attempts, "Attempts per batch")->capture_default_str();
  sub->add_option("--tau", s.tau, "Confidence threshold; below it the label is MIX")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void add_filter_options(CLI::App* sub, analysis::AnalysisFilter& f, bool& keep_chair) {
  sub->add_option("--from-year", f.year_min, "First year included")->capture_default_str();
  sub->add_option("--to-year", f.year_max, "Last year included")->capture_default_str();
  sub->add_flag("--keep-chairpersons", keep_chair, "Do not drop chairperson speeches");
}

void add_sentiment_options(CLI::App* sub, assembly::SentimentCuts& c) {
  sub->add_option("--sentiment-negative-below", c.negative_below,
                  "Speech mean below this is negative")
      ->check(CLI::Range(0.0, 5.0))
      ->capture_default_str();
  sub->add_option("--sentiment-positive-above", c.positive_above,
                  "Speech mean above this is positive")
      ->check(CLI::Range(0.0, 5.0))
      ->capture_default_str();
}

void apply_filter_flags(analysis::AnalysisFilter& f, bool keep_chair) {
  if (keep_chair) f.drop_roles.clear();
}

std::vector<fs::path> corpus_inputs(const std::string& dir, const std::vector<fs::path>& files) {
  if (!dir.empty() && !files.empty()) throw ValidationError("give either a corpus directory or files");
  if (!dir.empty()) return discover_speech_files(dir);
  if (files.empty()) throw ValidationError("no corpus input given");
  return files;
}

std::shared_ptr<spdlog::logger> make_logger(const std::string& level) {
  auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
  auto log = std::make_shared<spdlog::logger>("parltopic", sink);
  log->set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");
  auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") throw ValidationError("unknown log level '" + level + "'");
  log->set_level(lvl);
  return log;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Corpus annotation pipeline for policy-topic classification of parliamentary speeches",
               "parltopic"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "INI configuration file; command-line flags take precedence");
  app.require_subcommand(1, 1);
  app.failure_message(CLI::FailureMessage::help);

  Globals g;
  app.add_option("--out", g.out, "Output directory; every artifact is written beneath it")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads (default: logical CPU count)");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str();

  // sample ------------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "Draw train/dev/pool splits, or a balanced test set");
  std::string sample_dir;
  std::vector<fs::path> sample_files;
  SampleArgs sa;
  TestSetArgs ta;
  fs::path balanced_from;
  sample->add_option("--corpora", sample_dir, "Directory of speech files")->check(CLI::ExistingDirectory);
  sample->add_option("--corpus", sample_files, "Speech file (repeatable)")->check(CLI::ExistingFile);
  sample->add_option("--train-per-corpus", sa.train_per_corpus)->capture_default_str();
  sample->add_option("--dev-per-corpus", sa.dev_per_corpus)->capture_default_str();
  sample->add_option("--pool-per-corpus", sa.pool_per_corpus, "Extra unlabeled pool per corpus")
      ->capture_default_str();
  sample->add_option("--balanced-from", balanced_from, "Pool annotations; switches to test-set mode")
      ->check(CLI::ExistingFile);
  sample->add_option("--pool", ta.pool_speeches, "Pool speeches (test-set mode)")->check(CLI::ExistingFile);
  sample->add_option("--exclude", ta.exclude, "Speech files whose ids are excluded (test-set mode)")
      ->check(CLI::ExistingFile);
  sample->add_option("--per-label", ta.per_label, "Examples per label (test-set mode)")
      ->capture_default_str();

  // annotate ----------------------------------------------------------------
  auto* annotate = app.add_subcommand("annotate", "Label speeches with the teacher model");
  AnnotateArgs aa;
  annotate->add_option("--speeches", aa.speeches, "Speech file")->required()->check(CLI::ExistingFile);
  annotate->add_option("--name", aa.name, "Output name (default: input stem)");
  add_teacher_options(annotate, aa.teacher);

  // mine --------------------------------------------------------------------
  auto* mine = app.add_subcommand("mine", "Keyword-mine rare-label candidates and merge them into train");
  std::string mine_dir;
  std::vector<fs::path> mine_files;
  MineArgs ma;
  mine->add_option("--corpora", mine_dir, "Directory of speech files")->check(CLI::ExistingDirectory);
  mine->add_option("--corpus", mine_files, "Speech file (repeatable)")->check(CLI::ExistingFile);
  mine->add_option("--train-speeches", ma.train_speeches)->required()->check(CLI::ExistingFile);
  mine->add_option("--train-labels", ma.train_labels)->required()->check(CLI::ExistingFile);
  mine->add_option("--exclude", ma.exclude, "Speech files whose ids may not be mined")
      ->check(CLI::ExistingFile);
  mine->add_option("--keywords", ma.keywords, "label_code<TAB>keyword table")->check(CLI::ExistingFile);
  mine->add_option("--target", ma.target_code, "Target label code")->capture_default_str();
  mine->add_option("--cap-per-keyword", ma.cap_per_keyword)->capture_default_str();
  add_teacher_options(mine, ma.teacher);

  // agree -------------------------------------------------------------------
  auto* agree = app.add_subcommand("agree", "Krippendorff's alpha between annotators");
  AgreeArgs ga;
  agree->add_option("--annotations", ga.annotations, "name=path or path (repeatable, at least two)")
      ->required();

  // evaluate ----------------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "Per-label and macro F1 against gold labels");
  EvaluateArgs ea;
  evaluate->add_option("--gold", ea.gold, "Gold annotations")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--pred", ea.predictions, "Predictions file, one per run (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--name", ea.name, "Report name")->capture_default_str();

  // classify ----------------------------------------------------------------
  auto* classify = app.add_subcommand("classify", "Run the student model and apply the threshold");
  std::string classify_dir;
  std::vector<fs::path> classify_files;
  ClassifyArgs ca;
  classify->add_option("--corpora", classify_dir, "Directory of speech files")
      ->check(CLI::ExistingDirectory);
  classify->add_option("--speeches", classify_files, "Speech file (repeatable)")
      ->check(CLI::ExistingFile);
  add_student_options(classify, ca.student);

  // assemble ----------------------------------------------------------------
  auto* assemble = app.add_subcommand("assemble", "Write the per-parliament speech and sentence files");
  AssembleArgs asa;
  assemble->add_option("--corpora", asa.corpora, "Directory of speech and *_sentences.tsv files")
      ->required()
      ->check(CLI::ExistingDirectory);
  assemble->add_option("--predictions", asa.predictions, "Directory of <P>.predictions.tsv")
      ->check(CLI::ExistingDirectory);
  assemble->add_option("--partyfacts", asa.partyfacts, "party_id -> PartyFacts id table")
      ->check(CLI::ExistingFile);
  assemble->add_option("--vdem", asa.vdem, "parliament -> V-Dem country id table")
      ->check(CLI::ExistingFile);
  add_sentiment_options(assemble, asa.cuts);

  // analyze -----------------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "Topic, sentiment and gender matrices");
  AnalyzeArgs an;
  std::string metric = "all";
  bool analyze_keep_chair = false;
  analyze->add_option("--dataset", an.dataset, "Directory of <P>_speeches.tsv (default: <out>/dataset)");
  analyze->add_option("--metric", metric, "topics, sentiment, gender or all")
      ->check(CLI::IsMember({"topics", "sentiment", "gender", "all"}))
      ->capture_default_str();
  add_filter_options(analyze, an.filter, analyze_keep_chair);

  // pipeline ----------------------------------------------------------------
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  PipelineArgs pa;
  bool pipeline_keep_chair = false;
  pipeline->add_option("--corpora", pa.corpora, "Directory of speech and sentence files")
      ->required()
      ->check(CLI::ExistingDirectory);
  pipeline->add_option("--train-per-corpus", pa.sample.train_per_corpus)->capture_default_str();
  pipeline->add_option("--dev-per-corpus", pa.sample.dev_per_corpus)->capture_default_str();
  pipeline->add_option("--pool-per-corpus", pa.pool_per_corpus)->capture_default_str();
  pipeline->add_option("--per-label", pa.test_per_label)->capture_default_str();
  pipeline->add_option("--keywords", pa.keywords)->check(CLI::ExistingFile);
  pipeline->add_option("--cap-per-keyword", pa.cap_per_keyword)->capture_default_str();
  pipeline->add_option("--partyfacts", pa.partyfacts)->check(CLI::ExistingFile);
  pipeline->add_option("--vdem", pa.vdem)->check(CLI::ExistingFile);
  add_teacher_options(pipeline, pa.teacher);
  add_student_options(pipeline, pa.student);
  add_sentiment_options(pipeline, pa.cuts);
  add_filter_options(pipeline, pa.filter, pipeline_keep_chair);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  std::shared_ptr<spdlog::logger> log;
  try {
    log = make_logger(g.log_level);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  Context ctx;
  ctx.out = g.out;
  ctx.seed = g.seed;
  ctx.jobs = g.jobs > 0 ? g.jobs : omp_get_num_procs();
  ctx.log = log;
  omp_set_num_threads(ctx.jobs);

  if (const char* token = std::getenv(kTokenEnv)) {
    aa.teacher.token = ma.teacher.token = pa.teacher.token = token;
  }

  try {
    if (*sample) {
      if (!balanced_from.empty()) {
        if (ta.pool_speeches.empty()) throw ValidationError("--balanced-from needs --pool");
        ta.pool_labels = balanced_from;
        run_test_set(ctx, ta);
      } else {
        sa.corpora = corpus_inputs(sample_dir, sample_files);
        run_sample(ctx, sa);
      }
    } else if (*annotate) {
      run_annotate(ctx, aa);
    } else if (*mine) {
      ma.corpora = corpus_inputs(mine_dir, mine_files);
      run_mine(ctx, ma);
    } else if (*agree) {
      std::cout << run_agree(ctx, ga).dump(2) << '\n';
    } else if (*evaluate) {
      auto summary = run_evaluate(ctx, ea);
      std::cout << "macro-F1 " << summary["macro_f1"]["rendered"].get<std::string>() << '\n';
    } else if (*classify) {
      ca.inputs = corpus_inputs(classify_dir, classify_files);
      run_classify(ctx, ca);
    } else if (*assemble) {
      run_assemble(ctx, asa);
    } else if (*analyze) {
      apply_filter_flags(an.filter, analyze_keep_chair);
      if (an.dataset.empty()) an.dataset = ctx.out / "dataset";
      if (!fs::is_directory(an.dataset)) throw ValidationError("no dataset directory " + an.dataset.string());
      if (metric != "all") an.metrics = {metric};
      run_analyze(ctx, an);
    } else if (*pipeline) {
      apply_filter_flags(pa.filter, pipeline_keep_chair);
      std::cout << run_pipeline(ctx, pa).dump(2) << '\n';
    }
  } catch (const ValidationError& e) {
    log->error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("parltopic");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace parltopic::cli
