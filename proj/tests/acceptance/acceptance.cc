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


// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Set PARLTOPIC_UPDATE_GOLDEN=1 to rewrite the pipeline
// goldens under tests/data/golden/pipeline.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <spdlog/sinks/null_sink.h>
#include <spdlog/spdlog.h>

#include "cli/cli.h"
#include "cli/stages.h"
#include "parltopic/analysis.h"
#include "parltopic/assembly.h"
#include "parltopic/corpus.h"
#include "parltopic/inference.h"
#include "parltopic/manifest.h"
#include "parltopic/metrics.h"
#include "parltopic/mining.h"
#include "parltopic/sampling.h"
#include "parltopic/student_backends.h"
#include "parltopic/synthetic.h"
#include "parltopic/teacher.h"
#include "parltopic/teacher_backends.h"
#include "support/oracles.h"
#include "support/support.h"

namespace fs = std::filesystem;
using namespace parltopic;
using capschema::CapLabel;
using capschema::FinalLabel;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  char elapsed[32];
  std::snprintf(elapsed, sizeof elapsed, "%.2fs", seconds_since(t0));
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << elapsed << ")";
  if (!o.detail.empty()) std::cout << ": " << o.detail;
  std::cout << std::endl;
  if (!o.pass) ++failures;
}

cli::Context quiet_context(const fs::path& out, std::uint64_t seed) {
  cli::Context ctx;
  ctx.out = out;
  ctx.seed = seed;
  ctx.jobs = 1;
  ctx.log = std::make_shared<spdlog::logger>("acceptance",
                                             std::make_shared<spdlog::sinks::null_sink_mt>());
  return ctx;
}

std::vector<std::string> ids_of(const fs::path& speech_file) {
  std::vector<std::string> ids;
  for (const auto& s : corpus::read_speeches(speech_file).speeches) ids.push_back(s.id);
  return ids;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome alpha_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2026);
  std::size_t compared = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    auto units = oracle::random_reliability(gen);
    auto expected = oracle::krippendorff_alpha(units);
    metrics::ReliabilityData data;
    for (std::size_t c = 0; c < units[0].size(); ++c) data.coders.push_back("c" + std::to_string(c));
    data.units = units;
    if (expected.insufficient) {
      bool threw = false;
      try {
        metrics::krippendorff_alpha_nominal(data);
      } catch (const InsufficientData&) {
        threw = true;
      }
      o.require(threw, "instance " + std::to_string(i) + " should be insufficient");
      continue;
    }
    auto got = metrics::krippendorff_alpha_nominal(data);
    const double diff = std::abs(got.alpha - expected.alpha);
    worst = std::max(worst, diff);
    o.require(diff <= 1e-12, "instance " + std::to_string(i) + " differs by " + fmt(diff));
    o.require(got.no_variation == expected.no_variation, "no-variation flag differs");
    ++compared;
  }
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "took " + fmt(secs) + "s");
  if (o.pass) o.detail = std::to_string(compared) + " compared, max |diff| " + fmt(worst);
  return o;
}

Outcome f1_oracle() {
  Outcome o;
  const auto labels = capschema::Schema::builtin().by_code();
  std::vector<int> codes;
  for (auto l : labels) codes.push_back(l.code());
  std::mt19937_64 gen(77);
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    std::uniform_int_distribution<std::size_t> n_d(1, 600);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> lab(0, labels.size() - 1);
    const std::size_t n = n_d(gen);
    const double accuracy = u01(gen);
    std::vector<CapLabel> gold;
    std::vector<FinalLabel> pred;
    std::vector<int> g, p;
    for (std::size_t i = 0; i < n; ++i) {
      const auto gl = labels[lab(gen)];
      const auto pl = u01(gen) < accuracy ? gl : labels[lab(gen)];
      gold.push_back(gl);
      pred.push_back(FinalLabel::cap(pl));
      g.push_back(gl.code());
      p.push_back(pl.code());
    }
    auto rep = metrics::f1_from_confusion(metrics::confusion(gold, pred, labels));
    auto ref = oracle::f1_items(g, p, codes);
    auto track = [&](double a, double b, const char* what) {
      const double d = std::abs(a - b);
      worst = std::max(worst, d);
      o.require(d <= 1e-12, std::string(what) + " differs by " + fmt(d) + " on instance " +
                                std::to_string(inst));
    };
    for (std::size_t k = 0; k < labels.size(); ++k) track(rep.per_label[k].f1, ref.per_label[k], "per-label F1");
    track(rep.macro_f1, ref.macro, "macro F1");
    track(rep.micro_f1, ref.micro, "micro F1");
    track(rep.accuracy, ref.accuracy, "accuracy");
    o.require(std::abs(rep.micro_f1 - rep.accuracy) <= 1e-12,
              "micro F1 != accuracy on instance " + std::to_string(inst));
  }
  if (o.pass) o.detail = "200 instances, max |diff| " + fmt(worst);
  return o;
}

Outcome sampling_counts(const fs::path& corpora, const fs::path& scratch) {
  Outcome o;
  const auto t0 = Clock::now();
  cli::SampleArgs args;
  args.corpora = cli::discover_speech_files(corpora);
  o.require(args.corpora.size() == 29, "expected 29 corpora");
  auto first = cli::run_sample(quiet_context(scratch / "sample-1", 13), args);
  auto second = cli::run_sample(quiet_context(scratch / "sample-2", 13), args);
  o.require(first.n_train == 29000, "train count " + std::to_string(first.n_train));
  o.require(first.n_dev == 5800, "dev count " + std::to_string(first.n_dev));
  const auto train = ids_of(first.train);
  const auto dev = ids_of(first.dev);
  o.require(train.size() == 29000 && dev.size() == 5800, "files hold the wrong row counts");
  std::unordered_set<std::string> seen(train.begin(), train.end());
  o.require(seen.size() == train.size(), "duplicate ids in train");
  for (const auto& id : dev) o.require(seen.insert(id).second, "id " + id + " in train and dev");
  o.require(!testing::first_tree_difference(scratch / "sample-1", scratch / "sample-2"),
            "two runs with the same seed differ");
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "took " + fmt(secs) + "s");
  if (o.pass) o.detail = "29000 train + 5800 dev, disjoint, identical reruns";
  return o;
}

Outcome augmentation() {
  Outcome o;
  auto fx = synthetic::augmentation_fixture();
  auto mined = mining::mine_candidates(sampling::source_of(fx.corpus), fx.spec);
  for (std::size_t k = 0; k < mined.taken_per_keyword.size(); ++k) {
    o.require(mined.taken_per_keyword[k] <= fx.spec.cap_per_keyword,
              "keyword " + std::to_string(k) + " exceeded the cap");
  }
  auto mock = teacher::MockTeacher::keyword(fx.teacher_rules, fx.teacher_fallback);
  teacher::AnnotateOptions opts;
  opts.retry.base_delay = std::chrono::milliseconds(0);
  auto filtered = mining::filter_by_teacher(mined.candidates, fx.spec, mock,
                                            capschema::PromptTemplate::builtin(), opts);
  auto merged = mining::merge_augmentation(fx.train, filtered.accepted);
  std::size_t before = 0, after = 0;
  for (const auto& e : fx.train) before += e.label == CapLabel(capschema::kPublicLandsCode);
  for (const auto& e : merged.merged) after += e.label == CapLabel(capschema::kPublicLandsCode);
  o.require(filtered.accepted.size() == 779, "accepted " + std::to_string(filtered.accepted.size()));
  o.require(before == 145, "base " + std::to_string(before));
  o.require(after == 924, "merged " + std::to_string(after));
  if (o.pass) {
    o.detail = std::to_string(mined.candidates.size()) + " candidates, 779 accepted, 145 -> 924";
  }
  return o;
}

Outcome threshold() {
  Outcome o;
  const inference::ThresholdPolicy policy{0.60};
  const CapLabel health(3);
  o.require(inference::resolve({"a", health, 0.59}, policy).is_mix(), "0.59 should be Mix");
  o.require(inference::resolve({"a", health, 0.60}, policy) == FinalLabel::cap(health),
            "0.60 should keep the label");

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto labels = capschema::Schema::builtin().by_code();
  for (int set = 0; set < 1000 && o.pass; ++set) {
    std::vector<inference::Prediction> preds(1 + gen() % 200);
    for (auto& p : preds) {
      p.label = labels[gen() % labels.size()];
      p.confidence = set % 2 ? std::round(u01(gen) * 20.0) / 20.0 : u01(gen);
    }
    std::size_t previous = 0;
    for (int step = 0; step <= 20; ++step) {
      const auto resolved = inference::resolve_all(preds, {step / 20.0});
      const auto mix = static_cast<std::size_t>(
          std::count_if(resolved.begin(), resolved.end(), [](const FinalLabel& l) { return l.is_mix(); }));
      o.require(mix >= previous, "Mix count fell as tau rose in set " + std::to_string(set));
      previous = mix;
    }
  }

  std::vector<inference::ClassifiedSpeech> results;
  for (int i = 0; i < 1000; ++i) {
    inference::Prediction p{"s" + std::to_string(i), labels[i % labels.size()],
                            i % 10 == 0 ? 0.3 + 0.0029 * (i % 100) : 0.60 + 0.0004 * i};
    inference::ClassifiedSpeech c;
    c.speech_id = p.speech_id;
    c.label = inference::resolve(p, policy);
    c.confidence = p.confidence;
    c.raw_label = p.label;
    results.push_back(c);
  }
  const auto report = inference::coverage_report(results);
  o.require(report.kept_fraction == 0.90, "kept_fraction " + fmt(report.kept_fraction));
  if (o.pass) o.detail = "boundary ok, monotone over 1000 sets, kept_fraction 0.90";
  return o;
}

std::vector<LabeledExample> pool_with(std::size_t per_label, std::size_t culture) {
  std::vector<LabeledExample> pool;
  for (auto label : capschema::Schema::builtin().by_code()) {
    const std::size_t n = label.code() == 23 ? culture : per_label;
    for (std::size_t i = 0; i < n; ++i) {
      LabeledExample e;
      e.speech = testing::make_speech("p" + std::to_string(label.code()) + "-" + std::to_string(i));
      e.label = label;
      pool.push_back(std::move(e));
    }
  }
  return pool;
}

Outcome balanced() {
  Outcome o;
  auto full = sampling::balanced_test_sample(pool_with(55, 55), 40, {}, 3);
  o.require(full.examples.size() == 880, "size " + std::to_string(full.examples.size()));
  o.require(full.shortfalls.empty(), "unexpected shortfall");
  std::map<int, std::size_t> per;
  for (const auto& e : full.examples) ++per[e.label.code()];
  o.require(per.size() == 22, "labels present " + std::to_string(per.size()));
  for (const auto& [code, n] : per) o.require(n == 40, "label " + std::to_string(code) + " has " + std::to_string(n));

  auto short_pool = sampling::balanced_test_sample(pool_with(55, 12), 40, {}, 3);
  o.require(short_pool.examples.size() == 21 * 40 + 12, "short size " + std::to_string(short_pool.examples.size()));
  o.require(short_pool.shortfalls.size() == 1 && short_pool.shortfalls[0].label == CapLabel(23),
            "Culture shortfall not reported");
  if (o.pass) o.detail = "880 balanced; Culture undersupplied gives 852 with one shortfall";
  return o;
}

std::string digest_table(const fs::path& dataset) {
  std::ostringstream out;
  for (const auto& rel : testing::list_tree(dataset)) {
    out << rel << '\t' << fs::file_size(dataset / rel) << '\t' << manifest::file_digest(dataset / rel)
        << '\n';
  }
  return out.str();
}

Outcome end_to_end(const fs::path& corpora, const fs::path& scratch) {
  Outcome o;
  const auto t0 = Clock::now();
  const auto out = scratch / "pipeline";
  auto run = [&](const fs::path& where, const std::string& jobs) {
    // The pipeline prints its summary on stdout; keep this binary's output
    // to one line per criterion.
    std::ostringstream sink;
    auto* saved = std::cout.rdbuf(sink.rdbuf());
    struct Restore {
      std::streambuf* buf;
      ~Restore() { std::cout.rdbuf(buf); }
    } restore{saved};
    return cli::run({"--log-level", "off", "--out", where.string(), "--seed", "1", "--jobs", jobs,
                     "pipeline", "--corpora", corpora.string(), "--teacher-delay-ms", "0"});
  };
  const int rc = run(out, "1");
  o.require(rc == 0, "pipeline exit status " + std::to_string(rc));
  if (!o.pass) return o;
  const double secs = seconds_since(t0);

  const auto dataset = out / "dataset";
  const auto parls = synthetic::default_parliaments();
  for (const auto& p : parls) {
    for (const char* suffix : {"_speeches_text.tsv", "_speeches.tsv", "_sentences.tsv"}) {
      o.require(fs::exists(dataset / (p + suffix)), "missing " + p + suffix);
    }
  }
  const fs::path golden = fs::path(PARLTOPIC_TEST_DATA) / "golden" / "pipeline";
  auto msg = testing::golden_mismatch(golden / "dataset_digests.tsv", digest_table(dataset));
  o.require(msg.empty(), msg);
  for (const char* f : {"HR_speeches_text.tsv", "HR_speeches.tsv", "HR_sentences.tsv"}) {
    msg = testing::golden_mismatch(golden / f, testing::read_file(dataset / f));
    o.require(msg.empty(), msg);
  }

  const auto problems = manifest::verify_chain(out);
  o.require(problems.empty(), problems.empty() ? "" : "manifest chain: " + problems[0].stage + " " +
                                                         problems[0].path + ": " + problems[0].detail);

  analysis::Accumulator acc;
  for (const auto& p : parls) {
    std::ifstream in(dataset / (p + "_speeches.tsv"));
    for (const auto& row : assembly::read_enriched_speeches(in)) acc.add(row);
  }
  const auto topics = analysis::topic_distribution(acc);
  const auto gender = analysis::gender_topic_difference(acc);
  o.require(topics.rows.size() == 29, "topic rows " + std::to_string(topics.rows.size()));
  o.require(gender.rows.size() == 29, "gender rows " + std::to_string(gender.rows.size()));
  for (const auto& row : topics.values) {
    double sum = 0;
    for (const auto& v : row) sum += v.value_or(0.0);
    o.require(std::abs(sum - 1.0) <= 1e-9, "topic row sums to " + fmt(sum));
  }
  for (const auto& row : gender.values) {
    double sum = 0;
    for (const auto& v : row) sum += v.value_or(0.0);
    o.require(std::abs(sum) <= 1e-9, "gender row sums to " + fmt(sum));
  }

  const int rc2 = run(scratch / "pipeline-jobs4", "4");
  o.require(rc2 == 0 && !testing::first_tree_difference(dataset, scratch / "pipeline-jobs4" / "dataset"),
            "dataset differs with --jobs 4");
  o.require(secs < 300.0, "took " + fmt(secs) + "s");
  if (o.pass) o.detail = "87 files match goldens, chain consistent, one run " + fmt(secs) + "s";
  return o;
}

Outcome throughput() {
  Outcome o;
  synthetic::CorpusSpec spec;
  spec.parliament = "XX";
  spec.n_speeches = 20000;
  spec.seed = 8;
  const auto base = synthetic::generate(spec).speeches;
  const std::size_t total = 400000;
  auto student = inference::MockStudent::constant(3, 0.9);
  inference::ClassifyOptions opts;
  std::size_t next = 0;
  sampling::SpeechSource source = [&](corpus::Speech& s) {
    if (next == total) return false;
    s = base[next % base.size()];
    s.id = "t" + std::to_string(next++);
    return true;
  };
  std::size_t emitted = 0;
  const auto t0 = Clock::now();
  auto stats = inference::batch_classify(source, student, opts,
                                         [&](inference::ClassifiedSpeech&&) { ++emitted; });
  const double secs = seconds_since(t0);
  const double per_min = static_cast<double>(emitted) / secs * 60.0;
  o.require(emitted == total && stats.failed == 0, "emitted " + std::to_string(emitted));
  o.require(per_min >= 50000.0, fmt(per_min) + " speeches/min");
  if (o.pass) o.detail = fmt(per_min) + " speeches/min over " + std::to_string(total);
  return o;
}

}  // namespace

int main() {
  testing::TempDir scratch("acceptance");
  const auto fixture_sample = scratch / "corpora-1300";
  const auto fixture_pipeline = scratch / "corpora-1600";
  synthetic::write_fixture(fixture_sample, synthetic::default_parliaments(), 1300, 21);
  synthetic::write_fixture(fixture_pipeline, synthetic::default_parliaments(), 1600, 1);

  criterion("alpha-oracle-equivalence", alpha_oracle);
  criterion("f1-oracle-equivalence", f1_oracle);
  criterion("sampling-counts", [&] { return sampling_counts(fixture_sample, scratch.path()); });
  criterion("augmentation-arithmetic", augmentation);
  criterion("threshold-semantics", threshold);
  criterion("balanced-test-construction", balanced);
  criterion("end-to-end-pipeline", [&] { return end_to_end(fixture_pipeline, scratch.path()); });
  criterion("throughput", throughput);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
