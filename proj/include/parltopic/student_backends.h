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

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "parltopic/capschema.h"
#include "parltopic/inference.h"

namespace parltopic::inference {

/// Deterministic in-process student.
///
/// The label is either fixed, or the first keyword rule matching the
/// lowercased text (falling back to `fallback_code`). The confidence is
/// either fixed, or uniform on [0, 1) from a keyed hash of the speech id.
class MockStudent : public StudentBackend {
 public:
  struct Config {
    int label_code = capschema::kOtherCode;
    std::vector<std::pair<std::string, int>> keyword_rules;
    std::optional<double> fixed_confidence;
    std::uint64_t seed = 0;
  };

  explicit MockStudent(Config config);
  static MockStudent constant(int label_code, double confidence);
  static MockStudent uniform(int label_code, std::uint64_t seed);

  std::vector<StudentResult> predict(std::span<const StudentRequest> batch) override;
  std::string describe() const override { return "mock-student"; }

  StudentResult predict_one(const StudentRequest& r) const;
  /// The hash-derived confidence for an id.
  static double hashed_confidence(std::string_view id, std::uint64_t seed);

 private:
  Config config_;
};

class FunctionStudent : public StudentBackend {
 public:
  using Fn = std::function<std::vector<StudentResult>(std::span<const StudentRequest>)>;
  explicit FunctionStudent(Fn fn) : fn_(std::move(fn)) {}
  std::vector<StudentResult> predict(std::span<const StudentRequest> batch) override {
    return fn_(batch);
  }
  std::string describe() const override { return "function-student"; }

 private:
  Fn fn_;
};

/// Runs a child process speaking the JSON-lines contract on stdin/stdout:
/// one request line in, one response line out, in order. Calls are
/// serialized over the single child. A dead child is restarted on the next
/// call.
class ProcessStudent : public StudentBackend {
 public:
  explicit ProcessStudent(std::vector<std::string> argv);
  ~ProcessStudent() override;
  ProcessStudent(const ProcessStudent&) = delete;
  ProcessStudent& operator=(const ProcessStudent&) = delete;

  std::vector<StudentResult> predict(std::span<const StudentRequest> batch) override;
  std::string describe() const override;

 private:
  struct Child;
  void ensure_started();
  void stop();

  std::vector<std::string> argv_;
  std::mutex mu_;
  std::unique_ptr<Child> child_;
};

/// POSTs the batch as a JSON array to `<endpoint>` (path defaults to
/// /predict) and expects a JSON array of response objects.
class HttpStudent : public StudentBackend {
 public:
  explicit HttpStudent(std::string endpoint,
                       std::chrono::seconds timeout = std::chrono::seconds(120));
  std::vector<StudentResult> predict(std::span<const StudentRequest> batch) override;
  std::string describe() const override { return "http:" + base_ + path_; }

 private:
  std::string base_;
  std::string path_;
  std::chrono::seconds timeout_;
};

}  // namespace parltopic::inference
