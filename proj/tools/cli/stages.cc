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

#include "stages.h"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "parltopic/assembly.h"
#include "parltopic/capschema.h"
#include "parltopic/common.h"
#include "parltopic/corpus.h"
#include "parltopic/labeled.h"
#include "parltopic/manifest.h"
#include "parltopic/metrics.h"
#include "parltopic/mining.h"
#include "parltopic/resources.h"
#include "parltopic/sampling.h"
#include "parltopic/student_backends.h"
#include "parltopic/synthetic.h"
#include "parltopic/teacher_backends.h"
#include "parltopic/tsv.h"

namespace parltopic::cli {

using corpus::Speech;
using manifest::Manifest;

nlohmann::json TeacherArgs::describe() const {
  nlohmann::json j = {{"kind", kind},
                      {"max_in_flight", max_in_flight},
                      {"attempts", attempts},
                      {"base_delay_ms", base_delay_ms}};
  if (kind == "http") {
    j["endpoint"] = endpoint;
    j["model"] = model;
    j["token_set"] = !token.empty();
  }
  if (kind == "mock-constant") j["reply"] = constant_reply;
  if (!prompt.empty()) j["prompt"] = prompt.string();
  if (!labels.empty()) j["labels"] = labels.string();
  return j;
}

nlohmann::json StudentArgs::describe() const {
  nlohmann::json j = {{"kind", kind},
                      {"batch_size", batch_size},
                      {"max_concurrent", max_concurrent},
                      {"attempts", attempts},
                      {"tau", tau}};
  if (kind == "process") j["command"] = command;
  if (kind == "http") j["endpoint"] = endpoint;
  return j;
}

std::vector<fs::path> discover_speech_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IOFailure("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    const auto ext = e.path().extension().string();
    if (ext != ".tsv" && ext != ".jsonl") continue;
    if (name.size() > 14 && name.ends_with("_sentences.tsv")) continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no speech files in " + dir.string());
  return files;
}

std::string corpus_code(const fs::path& file) { return file.stem().string(); }

namespace {

/// Streams speeches from several files in sequence.
class FileSpeechSource {
 public:
  explicit FileSpeechSource(std::vector<fs::path> files, corpus::ParseOptions options = {})
      : files_(std::move(files)), options_(std::move(options)) {}

  bool next(Speech& s) {
    while (true) {
      if (!reader_) {
        if (idx_ == files_.size()) return false;
        const auto& path = files_[idx_++];
        auto format = corpus::format_from_path(path);
        if (!format) throw ValidationError("unknown speech file type: " + path.string());
        in_ = std::make_unique<std::ifstream>(tsv::open_input(path));
        reader_ = std::make_unique<corpus::SpeechReader>(*in_, *format, options_);
      }
      if (reader_->next(s)) return true;
      malformed_ += reader_->errors().size();
      reader_.reset();
      in_.reset();
    }
  }

  sampling::SpeechSource fn() {
    return [this](Speech& s) { return next(s); };
  }
  std::size_t malformed() const { return malformed_; }

 private:
  std::vector<fs::path> files_;
  corpus::ParseOptions options_;
  std::size_t idx_ = 0;
  std::unique_ptr<std::ifstream> in_;
  std::unique_ptr<corpus::SpeechReader> reader_;
  std::size_t malformed_ = 0;
};

sampling::IdSet read_ids(const std::vector<fs::path>& files) {
  sampling::IdSet ids;
  FileSpeechSource src(files);
  Speech s;
  while (src.next(s)) ids.insert(s.id);
  return ids;
}

void write_speeches(const fs::path& path, const std::vector<Speech>& speeches) {
  tsv::AtomicFile f(path);
  corpus::SpeechWriter w(f.stream());
  for (const auto& s : speeches) w.write(s);
  f.commit();
}

void write_labels(const fs::path& path, const std::vector<LabeledExample>& examples) {
  tsv::AtomicFile f(path);
  AnnotationWriter w(f.stream());
  for (const auto& e : examples) w.write(e);
  f.commit();
}

// Owns everything a teacher run needs so pointers into it stay valid.
struct TeacherSetup {
  std::unique_ptr<capschema::Schema> schema;
  std::unique_ptr<capschema::PromptTemplate> prompt;
  std::unique_ptr<teacher::TeacherBackend> backend;
  teacher::AnnotateOptions options;
};

TeacherSetup make_teacher(const TeacherArgs& a) {
  TeacherSetup t;
  t.schema = std::make_unique<capschema::Schema>(
      a.labels.empty() ? capschema::Schema::builtin() : capschema::Schema::load(a.labels));
  t.prompt = std::make_unique<capschema::PromptTemplate>(
      a.prompt.empty() ? capschema::PromptTemplate::builtin()
                       : capschema::PromptTemplate::load(a.prompt));
  if (a.kind == "mock-keyword") {
    t.backend = std::make_unique<teacher::MockTeacher>(
        teacher::MockTeacher::keyword(synthetic::keyword_rules(), capschema::kOtherCode));
  } else if (a.kind == "mock-hash") {
    t.backend = std::make_unique<teacher::MockTeacher>(teacher::MockTeacher::hashed(0, *t.schema));
  } else if (a.kind == "mock-constant") {
    t.backend = std::make_unique<teacher::MockTeacher>(teacher::MockTeacher::constant(a.constant_reply));
  } else if (a.kind == "http") {
    if (a.endpoint.empty()) throw ValidationError("--teacher-endpoint is required for http");
    t.backend = std::make_unique<teacher::HttpTeacher>(teacher::HttpTeacherConfig{
        a.endpoint, a.model, a.token, std::chrono::seconds(a.timeout_s)});
  } else {
    throw ValidationError("unknown teacher kind '" + a.kind + "'");
  }
  t.options.max_in_flight = a.max_in_flight;
  t.options.retry.max_attempts = a.attempts;
  t.options.retry.base_delay = std::chrono::milliseconds(a.base_delay_ms);
  t.options.annotator_id = a.kind == "http" ? (a.model.empty() ? "teacher" : a.model) : a.kind;
  t.options.usd_per_1k_prompt_tokens = a.usd_per_1k_prompt;
  t.options.usd_per_1k_response_tokens = a.usd_per_1k_response;
  t.options.schema = t.schema.get();
  return t;
}

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> argv;
  std::string cur;
  char quote = 0;
  for (char c : cmd) {
    if (quote) {
      if (c == quote) quote = 0;
      else cur += c;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == ' ' || c == '\t') {
      if (!cur.empty()) argv.push_back(std::move(cur)), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) argv.push_back(std::move(cur));
  return argv;
}

std::unique_ptr<inference::StudentBackend> make_student(const StudentArgs& a,
                                                        std::uint64_t seed) {
  if (a.kind == "mock") {
    inference::MockStudent::Config c;
    c.label_code = capschema::kOtherCode;
    c.keyword_rules = synthetic::keyword_rules();
    c.seed = seed;
    return std::make_unique<inference::MockStudent>(std::move(c));
  }
  if (a.kind == "process") {
    auto argv = split_command(a.command);
    if (argv.empty()) throw ValidationError("--student-cmd is required for process");
    return std::make_unique<inference::ProcessStudent>(std::move(argv));
  }
  if (a.kind == "http") {
    if (a.endpoint.empty()) throw ValidationError("--student-endpoint is required for http");
    return std::make_unique<inference::HttpStudent>(a.endpoint, std::chrono::seconds(a.timeout_s));
  }
  throw ValidationError("unknown student kind '" + a.kind + "'");
}

nlohmann::json coverage_json(const inference::CoverageReport& r) {
  nlohmann::json per_label = nlohmann::json::object();
  for (const auto& [code, n] : r.per_label_counts) per_label[std::to_string(code)] = n;
  return {{"n", r.n},
          {"kept", r.kept},
          {"mix", r.mix},
          {"failed", r.failed},
          {"kept_fraction", r.kept_fraction},
          {"mix_fraction", r.mix_fraction},
          {"per_label", per_label}};
}

std::size_t count_label(const std::vector<LabeledExample>& v, int code) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [&](const auto& e) { return e.label.code() == code; }));
}

}  // namespace

// ---------------------------------------------------------------------------

SampleOutputs run_sample(const Context& ctx, const SampleArgs& args) {
  if (args.corpora.empty()) throw ValidationError("sample: no corpora given");
  const auto dir = ctx.out / "sample";
  SampleOutputs out{dir / "train.tsv", dir / "dev.tsv", dir / "pool.tsv"};

  tsv::AtomicFile train_file(out.train), dev_file(out.dev);
  std::optional<tsv::AtomicFile> pool_file;
  if (args.pool_per_corpus) pool_file.emplace(out.pool);
  corpus::SpeechWriter train_w(train_file.stream()), dev_w(dev_file.stream());
  std::optional<corpus::SpeechWriter> pool_w;
  if (pool_file) pool_w.emplace(pool_file->stream());

  sampling::SamplePlan plan{args.train_per_corpus, args.dev_per_corpus, ctx.seed};
  nlohmann::json per_corpus = nlohmann::json::object();
  std::set<std::string> codes;
  for (const auto& file : args.corpora) {
    const auto code = corpus_code(file);
    if (!codes.insert(code).second) throw ValidationError("corpus code repeated: " + code);
    FileSpeechSource src({file});
    auto sample = sampling::corpus_sample(src.fn(), code, plan);
    sampling::IdSet taken;
    for (const auto& s : sample.train) train_w.write(s), taken.insert(s.id);
    for (const auto& s : sample.dev) dev_w.write(s), taken.insert(s.id);
    out.n_train += sample.train.size();
    out.n_dev += sample.dev.size();
    std::size_t pooled = 0;
    if (pool_w) {
      FileSpeechSource again({file});
      auto pool = sampling::random_pool(again.fn(), taken, args.pool_per_corpus, ctx.seed, code);
      for (const auto& s : pool) pool_w->write(s);
      pooled = pool.size();
      out.n_pool += pooled;
    }
    if (src.malformed()) ctx.log->warn("{}: {} malformed rows skipped", code, src.malformed());
    per_corpus[code] = {{"eligible", sample.eligible},
                        {"train", sample.train.size()},
                        {"dev", sample.dev.size()},
                        {"pool", pooled},
                        {"malformed", src.malformed()}};
    ctx.log->debug("{}: {} eligible, {} train, {} dev", code, sample.eligible, sample.train.size(),
                   sample.dev.size());
  }
  train_file.commit();
  dev_file.commit();
  if (pool_file) pool_file->commit();

  Manifest m("sample", ctx.out);
  for (const auto& f : args.corpora) m.input(f);
  m.output(out.train).output(out.dev);
  if (pool_file) m.output(out.pool);
  m.seed(ctx.seed)
      .param("train_per_corpus", args.train_per_corpus)
      .param("dev_per_corpus", args.dev_per_corpus)
      .param("pool_per_corpus", args.pool_per_corpus)
      .count("train", out.n_train)
      .count("dev", out.n_dev)
      .count("pool", out.n_pool)
      .count("corpora", per_corpus);
  m.write();
  ctx.log->info("sample: {} corpora, {} train, {} dev, {} pool", args.corpora.size(), out.n_train,
                out.n_dev, out.n_pool);
  return out;
}

TestSetOutputs run_test_set(const Context& ctx, const TestSetArgs& args) {
  auto speeches = corpus::read_speeches(args.pool_speeches).speeches;
  auto labels = read_annotations(args.pool_labels);
  auto pool = join_labeled(labels, speeches, "pool");
  auto exclude = args.exclude.empty() ? sampling::IdSet{} : read_ids(args.exclude);
  auto sample = sampling::balanced_test_sample(pool, args.per_label, exclude, ctx.seed);

  const auto dir = ctx.out / "sample";
  TestSetOutputs out{dir / "test.tsv", dir / "test.labels.tsv"};
  std::vector<Speech> test_speeches;
  for (const auto& e : sample.examples) test_speeches.push_back(e.speech);
  write_speeches(out.speeches, test_speeches);
  write_labels(out.labels, sample.examples);
  out.n = sample.examples.size();
  out.shortfall_labels = sample.shortfalls.size();

  nlohmann::json shortfalls = nlohmann::json::array();
  for (const auto& s : sample.shortfalls) {
    ctx.log->warn("test set: label {} has {} of {} requested", s.label.code(), s.available,
                  s.requested);
    shortfalls.push_back(
        {{"label", s.label.code()}, {"available", s.available}, {"requested", s.requested}});
  }
  Manifest m("sample-test", ctx.out);
  m.input(args.pool_speeches).input(args.pool_labels);
  for (const auto& f : args.exclude) m.input(f);
  m.output(out.speeches).output(out.labels).seed(ctx.seed).param("per_label", args.per_label);
  m.count("pool", pool.size()).count("test", out.n).count("shortfalls", shortfalls);
  m.write();
  ctx.log->info("test set: {} examples, {} labels short", out.n, out.shortfall_labels);
  return out;
}

AnnotateOutputs run_annotate(const Context& ctx, const AnnotateArgs& args) {
  auto t = make_teacher(args.teacher);
  const auto name = args.name.empty() ? corpus_code(args.speeches) : args.name;
  const auto dir = ctx.out / "annotate";
  AnnotateOutputs out{dir / (name + ".labels.tsv"), dir / (name + ".failures.tsv")};

  tsv::AtomicFile labels_file(out.labels), failures_file(out.failures);
  AnnotationWriter writer(labels_file.stream());
  failures_file.stream() << tsv::join_row({"speech_id", "reason", "attempts", "raw_response"});

  FileSpeechSource src({args.speeches});
  auto stats = teacher::annotate_batch(
      src.fn(), *t.prompt, *t.backend, t.options, [&](teacher::AnnotationOutcome&& o) {
        if (auto* e = std::get_if<LabeledExample>(&o)) {
          writer.write(*e);
        } else {
          const auto& f = std::get<teacher::AnnotationFailure>(o);
          failures_file.stream() << tsv::join_row(
              {f.speech_id, f.reason, std::to_string(f.attempts), f.raw_response.value_or("")});
        }
      });
  labels_file.commit();
  failures_file.commit();
  out.labeled = stats.labeled;
  out.failed = stats.failed;

  Manifest m("annotate-" + name, ctx.out);
  m.input(args.speeches).output(out.labels).output(out.failures);
  m.param("teacher", args.teacher.describe())
      .count("inputs", stats.inputs)
      .count("labeled", stats.labeled)
      .count("failed", stats.failed)
      .count("retries", stats.retries)
      .count("prompt_tokens_est", stats.cost.prompt_tokens())
      .count("usd_est", stats.cost.usd());
  m.write();
  ctx.log->info("annotate {}: {} labeled, {} failed, {} retries", name, stats.labeled, stats.failed,
                stats.retries);
  return out;
}

MineOutputs run_mine(const Context& ctx, const MineArgs& args) {
  const capschema::CapLabel target = capschema::label_from_code(args.target_code);
  auto spec = args.keywords.empty() ? mining::KeywordSpec::builtin_public_lands()
                                    : mining::KeywordSpec::load(args.keywords, target);
  spec.target_label = target;
  spec.cap_per_keyword = args.cap_per_keyword;
  spec.seed = ctx.seed;
  spec.validate();

  FileSpeechSource src(args.corpora);
  auto mined = mining::mine_candidates(src.fn(), spec);
  const auto exclude = args.exclude.empty() ? sampling::IdSet{} : read_ids(args.exclude);
  std::vector<Speech> candidates;
  std::size_t excluded = 0;
  for (auto& s : mined.candidates) {
    if (exclude.count(s.id)) {
      ++excluded;
      continue;
    }
    candidates.push_back(std::move(s));
  }

  auto t = make_teacher(args.teacher);
  auto filtered = mining::filter_by_teacher(candidates, spec, *t.backend, *t.prompt, t.options);

  auto train_speeches = corpus::read_speeches(args.train_speeches).speeches;
  auto train = join_labeled(read_annotations(args.train_labels), train_speeches,
                            t.options.annotator_id);
  auto merged = mining::merge_augmentation(train, filtered.accepted);

  const auto dir = ctx.out / "mine";
  MineOutputs out{dir / "candidates.tsv", dir / "accepted.labels.tsv", dir / "train_merged.tsv",
                  dir / "train_merged.labels.tsv"};
  write_speeches(out.candidates, candidates);
  write_labels(out.accepted, filtered.accepted);
  std::vector<Speech> merged_speeches;
  for (const auto& e : merged.merged) merged_speeches.push_back(e.speech);
  write_speeches(out.merged_speeches, merged_speeches);
  write_labels(out.merged_labels, merged.merged);

  out.n_candidates = candidates.size();
  out.n_accepted = filtered.accepted.size();
  out.n_target_before = count_label(train, target.code());
  out.n_target_after = count_label(merged.merged, target.code());

  nlohmann::json per_kw = nlohmann::json::object();
  for (std::size_t i = 0; i < spec.keywords.size(); ++i) {
    per_kw[spec.keywords[i]] = {{"matches", mined.matches_per_keyword[i]},
                                {"taken", mined.taken_per_keyword[i]}};
  }
  Manifest m("mine", ctx.out);
  for (const auto& f : args.corpora) m.input(f);
  m.input(args.train_speeches).input(args.train_labels);
  for (const auto& f : args.exclude) m.input(f);
  m.output(out.candidates).output(out.accepted).output(out.merged_speeches).output(out.merged_labels);
  m.seed(ctx.seed)
      .param("target", target.code())
      .param("cap_per_keyword", spec.cap_per_keyword)
      .param("keywords", spec.keywords)
      .param("teacher", args.teacher.describe())
      .count("scanned", mined.scanned)
      .count("skipped_no_english", mined.skipped_no_english)
      .count("per_keyword", per_kw)
      .count("excluded", excluded)
      .count("candidates", out.n_candidates)
      .count("accepted", out.n_accepted)
      .count("teacher_failures", filtered.failures.size())
      .count("target_before", out.n_target_before)
      .count("target_after", out.n_target_after)
      .count("merge_conflicts", merged.conflicts.size());
  m.write();
  ctx.log->info("mine: {} candidates, {} accepted ({:.3f}), label {} {} -> {}", out.n_candidates,
                out.n_accepted, filtered.acceptance_rate(), target.code(), out.n_target_before,
                out.n_target_after);
  return out;
}

nlohmann::json run_agree(const Context& ctx, const AgreeArgs& args) {
  if (args.annotations.size() < 2) throw ValidationError("agree: need at least two annotation files");
  metrics::AnnotationTable table;
  std::vector<fs::path> inputs;
  for (const auto& spec : args.annotations) {
    auto eq = spec.find('=');
    fs::path path = eq == std::string::npos ? fs::path(spec) : fs::path(spec.substr(eq + 1));
    std::string name = eq == std::string::npos ? corpus_code(path) : spec.substr(0, eq);
    if (table.count(name)) throw ValidationError("agree: annotator named twice: " + name);
    auto& col = table[name];
    for (auto& r : read_annotations(path)) col.insert_or_assign(r.speech_id, r.label);
    inputs.push_back(path);
  }
  auto pairs = metrics::pairwise_agreement(table);

  // All annotators together.
  metrics::ReliabilityData data;
  std::set<std::string> units;
  for (const auto& [name, col] : table) {
    data.coders.push_back(name);
    for (const auto& [id, _] : col) units.insert(id);
  }
  for (const auto& id : units) {
    std::vector<std::optional<int>> row;
    for (const auto& [name, col] : table) {
      auto it = col.find(id);
      row.push_back(it == col.end() ? std::nullopt : std::optional(it->second.category()));
    }
    data.units.push_back(std::move(row));
  }
  nlohmann::json overall;
  try {
    auto r = metrics::krippendorff_alpha_nominal(data);
    overall = {{"alpha", r.alpha},
               {"pairable_units", r.pairable_units},
               {"no_variation", r.no_variation}};
  } catch (const InsufficientData& e) {
    overall = {{"alpha", nullptr}, {"error", e.what()}};
  }

  const auto dir = ctx.out / "agree";
  const auto table_path = dir / "pairwise.tsv";
  tsv::AtomicFile f(table_path);
  f.stream() << tsv::join_row({"first", "second", "shared_units", "alpha"});
  nlohmann::json pairs_json = nlohmann::json::array();
  for (const auto& p : pairs) {
    f.stream() << tsv::join_row({p.first, p.second, std::to_string(p.shared_units),
                                 p.result ? tsv::format_double(p.result->alpha) : "NA"});
    pairs_json.push_back({{"first", p.first},
                          {"second", p.second},
                          {"shared_units", p.shared_units},
                          {"alpha", p.result ? nlohmann::json(p.result->alpha) : nlohmann::json()}});
  }
  f.commit();
  nlohmann::json summary = {{"overall", overall}, {"pairs", pairs_json}};
  const auto summary_path = dir / "summary.json";
  tsv::write_file(summary_path, summary.dump(2) + "\n");

  Manifest m("agree", ctx.out);
  for (const auto& p : inputs) m.input(p);
  m.output(table_path).output(summary_path).count("annotators", table.size()).count("units", units.size());
  m.write();
  if (overall["alpha"].is_number()) {
    ctx.log->info("agree: {} annotators, alpha {:.4f}", table.size(), overall["alpha"].get<double>());
  }
  return summary;
}

nlohmann::json run_evaluate(const Context& ctx, const EvaluateArgs& args) {
  if (args.predictions.empty()) throw ValidationError("evaluate: no prediction files");
  const auto& schema = capschema::Schema::builtin();
  std::vector<std::string> ids;
  std::vector<capschema::CapLabel> gold;
  std::size_t dnk = 0;
  for (const auto& r : read_annotations(args.gold)) {
    if (r.label.is_do_not_know()) {
      ++dnk;
      continue;
    }
    ids.push_back(r.speech_id);
    gold.push_back(r.label.cap());
  }
  if (gold.empty()) throw ValidationError("evaluate: gold file has no usable rows");

  const auto dir = ctx.out / "evaluate";
  Manifest m("evaluate-" + args.name, ctx.out);
  m.input(args.gold);
  std::vector<double> macros;
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t k = 0; k < args.predictions.size(); ++k) {
    const auto& path = args.predictions[k];
    m.input(path);
    std::map<std::string, capschema::FinalLabel, std::less<>> by_id;
    for (auto& p : inference::read_predictions(path, schema)) by_id.insert_or_assign(p.speech_id, p.label);
    std::vector<capschema::FinalLabel> pred;
    bool any_mix = false;
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw ValidationError("evaluate: no prediction for " + id + " in " + path.string());
      any_mix |= it->second.is_mix();
      pred.push_back(it->second);
    }
    auto cm = metrics::confusion(gold, pred, schema.by_code(), any_mix);
    auto report = metrics::f1_from_confusion(cm);
    macros.push_back(report.macro_f1);

    const auto stem = args.name + ".run" + std::to_string(k + 1);
    const auto scores_path = dir / (stem + ".scores.tsv");
    const auto confusion_path = dir / (stem + ".confusion.tsv");
    tsv::AtomicFile sf(scores_path);
    sf.stream() << tsv::join_row({"label_code", "label_name", "precision", "recall", "f1", "support"});
    for (const auto& s : report.per_label) {
      sf.stream() << tsv::join_row({std::to_string(s.label.code()), schema.name(s.label),
                                    tsv::format_fixed(s.precision, 4), tsv::format_fixed(s.recall, 4),
                                    tsv::format_fixed(s.f1, 4), std::to_string(s.support)});
    }
    sf.commit();
    tsv::write_file(confusion_path, cm.to_tsv());
    m.output(scores_path).output(confusion_path);
    runs.push_back({{"predictions", path.filename().string()},
                    {"n", report.n},
                    {"macro_f1", report.macro_f1},
                    {"micro_f1", report.micro_f1},
                    {"accuracy", report.accuracy},
                    {"mix_predictions", static_cast<std::size_t>(std::count_if(
                                            pred.begin(), pred.end(),
                                            [](const auto& p) { return p.is_mix(); }))}});
    ctx.log->info("evaluate {} run {}: macro-F1 {:.4f}, accuracy {:.4f} on {}", args.name, k + 1,
                  report.macro_f1, report.accuracy, report.n);
  }
  auto agg = metrics::aggregate_runs(macros);
  nlohmann::json summary = {{"name", args.name},
                            {"gold_rows", gold.size()},
                            {"gold_do_not_know_dropped", dnk},
                            {"runs", runs},
                            {"macro_f1", {{"mean", agg.mean}, {"sd", agg.sd}, {"rendered", agg.render()}}}};
  const auto summary_path = dir / (args.name + ".summary.json");
  tsv::write_file(summary_path, summary.dump(2) + "\n");
  m.output(summary_path).count("runs", macros.size()).count("macro_f1", agg.render());
  m.write();
  return summary;
}

ClassifyOutputs run_classify(const Context& ctx, const ClassifyArgs& args) {
  if (args.inputs.empty()) throw ValidationError("classify: no inputs");
  auto student = make_student(args.student, ctx.seed);
  inference::ClassifyOptions options;
  options.batch_size = args.student.batch_size;
  options.max_concurrent = args.student.max_concurrent;
  options.max_attempts = args.student.attempts;
  options.policy.tau = args.student.tau;
  options.policy.validate();

  ClassifyOutputs out;
  inference::CoverageCounter total;
  nlohmann::json per_file = nlohmann::json::object();
  Manifest m(args.stage, ctx.out);
  for (const auto& file : args.inputs) {
    const auto code = corpus_code(file);
    const auto path = ctx.out / "classify" / (code + ".predictions.tsv");
    tsv::AtomicFile f(path);
    inference::PredictionWriter writer(f.stream());
    inference::CoverageCounter counter;
    FileSpeechSource src({file});
    auto stats = inference::batch_classify(src.fn(), *student, options,
                                           [&](inference::ClassifiedSpeech&& c) {
                                             writer.write(c);
                                             counter.add(c);
                                           });
    f.commit();
    total.merge(counter);
    auto rep = counter.report();
    per_file[code] = {{"n", rep.n}, {"mix", rep.mix}, {"failed", rep.failed}};
    if (stats.failed) ctx.log->warn("classify {}: {} items failed", code, stats.failed);
    m.input(file).output(path);
    out.predictions.push_back(path);
  }
  out.coverage = total.report();
  m.seed(ctx.seed)
      .param("student", args.student.describe())
      .count("coverage", coverage_json(out.coverage))
      .count("per_file", per_file);
  m.write();
  ctx.log->info("classify: {} speeches, kept {:.4f}, mix {:.4f}", out.coverage.n,
                out.coverage.kept_fraction, out.coverage.mix_fraction);
  return out;
}

AssembleOutputs run_assemble(const Context& ctx, const AssembleArgs& args) {
  args.cuts.validate();
  const auto files = discover_speech_files(args.corpora);
  const auto pred_dir = args.predictions.empty() ? ctx.out / "classify" : args.predictions;
  auto load_table = [](const fs::path& p, std::string_view builtin) {
    if (!p.empty()) return assembly::JoinTable::load(p);
    std::istringstream in{std::string(builtin)};
    return assembly::JoinTable::parse(in);
  };
  const auto partyfacts = load_table(args.partyfacts, resources::partyfacts_example_tsv());
  const auto vdem = load_table(args.vdem, resources::vdem_example_tsv());
  const auto dir = ctx.out / "dataset";

  const auto n = static_cast<std::ptrdiff_t>(files.size());
  std::vector<assembly::DatasetManifest> manifests(files.size());
  std::vector<assembly::AssemblyStats> stats(files.size());
  std::vector<std::exception_ptr> errors(files.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      const auto code = corpus_code(files[k]);
      assembly::AssemblyInputs in;
      in.speeches = corpus::read_speeches(files[k]).speeches;
      for (auto& p : inference::read_predictions(pred_dir / (code + ".predictions.tsv"))) {
        auto id = p.speech_id;
        in.predictions.insert_or_assign(std::move(id), std::move(p));
      }
      const auto sentence_path = args.corpora / (code + "_sentences.tsv");
      if (fs::exists(sentence_path)) {
        auto sin = tsv::open_input(sentence_path);
        in.sentences = corpus::read_sentences(sin);
      }
      manifests[k] = assembly::assemble_parliament(code, std::move(in), partyfacts, vdem, args.cuts, dir,
                                                   stats[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  AssembleOutputs out;
  Manifest m("assemble", ctx.out);
  nlohmann::json per_parl = nlohmann::json::object();
  for (std::size_t k = 0; k < files.size(); ++k) {
    const auto code = corpus_code(files[k]);
    m.input(files[k]).input(pred_dir / (code + ".predictions.tsv"));
    if (auto sp = args.corpora / (code + "_sentences.tsv"); fs::exists(sp)) m.input(sp);
    for (const auto& f : manifests[k].files) {
      m.output(dir / f.name);
      out.files.push_back(dir / f.name);
    }
    out.speeches += manifests[k].files[0].rows;
    out.sentences += manifests[k].files[2].rows;
    auto j = manifests[k].to_json();
    j["missing_predictions"] = stats[k].missing_predictions;
    j["with_sentiment"] = stats[k].with_sentiment;
    j["partyfacts_misses"] = stats[k].joins.partyfacts_misses;
    j["vdem_misses"] = stats[k].joins.vdem_misses;
    per_parl[code] = j;
    if (stats[k].missing_predictions) {
      ctx.log->warn("assemble {}: {} speeches without prediction", code, stats[k].missing_predictions);
    }
  }
  m.param("partyfacts", args.partyfacts.empty() ? "builtin-example" : args.partyfacts.string())
      .param("vdem", args.vdem.empty() ? "builtin-example" : args.vdem.string())
      .param("sentiment_negative_below", args.cuts.negative_below)
      .param("sentiment_positive_above", args.cuts.positive_above)
      .count("speeches", out.speeches)
      .count("sentences", out.sentences)
      .count("parliaments", per_parl);
  m.write();
  ctx.log->info("assemble: {} parliaments, {} speeches, {} sentences", files.size(), out.speeches,
                out.sentences);
  return out;
}

AnalyzeOutputs run_analyze(const Context& ctx, const AnalyzeArgs& args) {
  args.filter.validate();
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(args.dataset)) {
    const auto name = e.path().filename().string();
    if (name.ends_with("_speeches.tsv")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("analyze: no *_speeches.tsv files in " + args.dataset.string());

  analysis::Accumulator acc(args.filter);
  for (const auto& f : files) {
    auto in = tsv::open_input(f);
    auto rows = assembly::read_enriched_speeches(in);
    acc.merge(analysis::accumulate(rows, args.filter));
  }

  AnalyzeOutputs out;
  Manifest m("analyze", ctx.out);
  for (const auto& f : files) m.input(f);
  const auto dir = ctx.out / "analysis";
  for (const auto& name : args.metrics) {
    auto metric = analysis::parse_metric(name);
    if (!metric) throw ValidationError("unknown metric '" + name + "'");
    auto matrix = analysis::compute(*metric, acc);
    for (const auto& o : matrix.omitted) {
      ctx.log->warn("analyze {}: row {} omitted ({})", name, o.parliament, o.reason);
    }
    const auto tsv_path = dir / (name + ".tsv");
    const auto json_path = dir / (name + ".json");
    tsv::AtomicFile f(tsv_path);
    matrix.write_tsv(f.stream());
    f.commit();
    tsv::write_file(json_path, matrix.summary(acc).dump(2) + "\n");
    m.output(tsv_path).output(json_path);
    out.files.push_back(tsv_path);
    out.files.push_back(json_path);
    out.matrices.push_back(std::move(matrix));
  }
  m.param("filter", args.filter.to_json()).param("metrics", args.metrics);
  m.count("kept", acc.filter_stats().kept).count("seen", acc.filter_stats().seen);
  m.write();
  ctx.log->info("analyze: {} of {} speeches kept", acc.filter_stats().kept, acc.filter_stats().seen);
  return out;
}

nlohmann::json run_pipeline(const Context& ctx, const PipelineArgs& args) {
  const auto files = discover_speech_files(args.corpora);
  SampleArgs sa = args.sample;
  sa.corpora = files;
  sa.pool_per_corpus = args.pool_per_corpus;
  auto sample = run_sample(ctx, sa);

  AnnotateArgs aa;
  aa.teacher = args.teacher;
  aa.speeches = sample.train;
  auto train_ann = run_annotate(ctx, aa);
  aa.speeches = sample.dev;
  auto dev_ann = run_annotate(ctx, aa);
  aa.speeches = sample.pool;
  auto pool_ann = run_annotate(ctx, aa);

  MineArgs ma;
  ma.corpora = files;
  ma.train_speeches = sample.train;
  ma.train_labels = train_ann.labels;
  ma.exclude = {sample.dev, sample.pool};
  ma.keywords = args.keywords;
  ma.cap_per_keyword = args.cap_per_keyword;
  ma.teacher = args.teacher;
  auto mine = run_mine(ctx, ma);

  TestSetArgs ta;
  ta.pool_speeches = sample.pool;
  ta.pool_labels = pool_ann.labels;
  ta.exclude = {sample.train, sample.dev};
  ta.per_label = args.test_per_label;
  auto test = run_test_set(ctx, ta);

  ClassifyArgs ca;
  ca.student = args.student;
  ca.inputs = files;
  auto classified = run_classify(ctx, ca);
  ca.inputs = {test.speeches};
  ca.stage = "classify-test";
  auto classified_test = run_classify(ctx, ca);

  EvaluateArgs ea;
  ea.gold = test.labels;
  ea.predictions = classified_test.predictions;
  ea.name = "test";
  auto eval = run_evaluate(ctx, ea);

  AssembleArgs asa;
  asa.corpora = args.corpora;
  asa.predictions = ctx.out / "classify";
  asa.partyfacts = args.partyfacts;
  asa.vdem = args.vdem;
  asa.cuts = args.cuts;
  auto assembled = run_assemble(ctx, asa);

  AnalyzeArgs an;
  an.dataset = ctx.out / "dataset";
  an.filter = args.filter;
  auto analyzed = run_analyze(ctx, an);

  auto problems = manifest::verify_chain(ctx.out);
  nlohmann::json problems_json = nlohmann::json::array();
  for (const auto& p : problems) {
    ctx.log->error("manifest chain: {} {}: {}", p.stage, p.path, p.detail);
    problems_json.push_back({{"stage", p.stage}, {"path", p.path}, {"detail", p.detail}});
  }
  nlohmann::json summary = {
      {"corpora", files.size()},
      {"train", sample.n_train},
      {"dev", sample.n_dev},
      {"pool", sample.n_pool},
      {"train_labeled", train_ann.labeled},
      {"mined_candidates", mine.n_candidates},
      {"mined_accepted", mine.n_accepted},
      {"target_before", mine.n_target_before},
      {"target_after", mine.n_target_after},
      {"test", test.n},
      {"classified", classified.coverage.n},
      {"kept_fraction", classified.coverage.kept_fraction},
      {"test_macro_f1", eval["macro_f1"]["mean"]},
      {"dataset_speeches", assembled.speeches},
      {"dataset_sentences", assembled.sentences},
      {"analysis_files", analyzed.files.size()},
      {"chain_problems", problems_json}};
  Manifest m("pipeline", ctx.out);
  m.seed(ctx.seed)
      .param("teacher", args.teacher.describe())
      .param("student", args.student.describe())
      .param("filter", args.filter.to_json())
      .count("summary", summary);
  m.write();
  if (!problems.empty()) throw Error("manifest chain has " + std::to_string(problems.size()) + " problems");
  return summary;
}

}  // namespace parltopic::cli
