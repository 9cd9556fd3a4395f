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
#include <string>
#include <utility>
#include <vector>

#include "parltopic/capschema.h"
#include "parltopic/teacher.h"

namespace parltopic::teacher {

/// Deterministic in-process teacher.
///
///   constant: always replies `reply`.
///   hash:     replies the code at position splitmix64(seed ^ fnv1a64(id))
///             mod 22 of the schema's codes in ascending order.
///   keyword:  replies the code of the first rule whose keyword occurs in the
///             lowercased speech text, else `fallback_code`.
class MockTeacher : public TeacherBackend {
 public:
  enum class Mode { constant, hash, keyword };

  static MockTeacher constant(std::string reply);
  static MockTeacher hashed(std::uint64_t seed,
                            const capschema::Schema& schema = capschema::Schema::builtin());
  static MockTeacher keyword(std::vector<std::pair<std::string, int>> rules, int fallback_code);

  TeacherResponse complete(const TeacherRequest& request) override;
  std::string describe() const override;

  /// The label the hash mode assigns, exposed for fixture arithmetic.
  static int hashed_code(std::string_view id, std::uint64_t seed,
                         const capschema::Schema& schema = capschema::Schema::builtin());

 private:
  Mode mode_ = Mode::constant;
  std::string reply_;
  std::uint64_t seed_ = 0;
  const capschema::Schema* schema_ = nullptr;
  std::vector<std::pair<std::string, int>> rules_;
  int fallback_code_ = capschema::kOtherCode;
};

/// Adapter for tests and one-off scripted behaviour.
class FunctionTeacher : public TeacherBackend {
 public:
  using Fn = std::function<TeacherResponse(const TeacherRequest&)>;
  explicit FunctionTeacher(Fn fn, std::string name = "function")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  TeacherResponse complete(const TeacherRequest& request) override { return fn_(request); }
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

struct HttpTeacherConfig {
  /// e.g. http://localhost:8080/v1/annotate
  std::string endpoint;
  std::string model;
  /// Sent as `Authorization: Bearer <token>` when nonempty.
  std::string token;
  std::chrono::seconds timeout{60};
};

/// POSTs {"model", "prompt"} as JSON and expects {"text"} back. 429 and 5xx
/// replies are transient, other non-2xx replies permanent, and connection
/// failures mark the backend unavailable.
class HttpTeacher : public TeacherBackend {
 public:
  explicit HttpTeacher(HttpTeacherConfig config);
  TeacherResponse complete(const TeacherRequest& request) override;
  std::string describe() const override;

 private:
  HttpTeacherConfig config_;
  std::string base_;  // scheme://host:port
  std::string path_;
};

}  // namespace parltopic::teacher
