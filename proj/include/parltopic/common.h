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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace parltopic {

inline constexpr const char* kVersion = "0.3.0";

/// Base of every exception thrown by the library. Recoverable per-item
/// problems (malformed rows, annotation failures, sampling shortfalls) are
/// reported as values instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that violates a documented precondition or file contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IOFailure : public Error {
 public:
  using Error::Error;
};

class DuplicateId : public ValidationError {
 public:
  explicit DuplicateId(std::string id)
      : ValidationError("duplicate speech id: " + id), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class ErrorBudgetExceeded : public ValidationError {
 public:
  ErrorBudgetExceeded(std::size_t budget, const std::string& last)
      : ValidationError("more than " + std::to_string(budget) +
                        " malformed rows; last: " + last) {}
};

class ScoreOutOfRange : public ValidationError {
 public:
  ScoreOutOfRange(std::size_t line, double score)
      : ValidationError("line " + std::to_string(line) +
                        ": sentiment score out of [0,5]: " +
                        std::to_string(score)) {}
};

class UnknownCode : public ValidationError {
 public:
  explicit UnknownCode(int code)
      : ValidationError("unknown CAP code: " + std::to_string(code)),
        code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

class UnknownLabel : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnresolvedPlaceholder : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientCorpus : public ValidationError {
 public:
  InsufficientCorpus(std::size_t available, std::size_t required)
      : ValidationError("corpus has " + std::to_string(available) +
                        " eligible speeches, " + std::to_string(required) +
                        " required"),
        available_(available),
        required_(required) {}
  std::size_t available() const { return available_; }
  std::size_t required() const { return required_; }

 private:
  std::size_t available_;
  std::size_t required_;
};

class Unparseable : public Error {
 public:
  explicit Unparseable(const std::string& text)
      : Error("unparseable teacher response: " + text) {}
};

class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

class StudentUnavailable : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LengthMismatch : public ValidationError {
 public:
  LengthMismatch(std::size_t gold, std::size_t pred)
      : ValidationError("gold has " + std::to_string(gold) +
                        " items, predictions " + std::to_string(pred)) {}
};

class EmptyMatrix : public ValidationError {
 public:
  EmptyMatrix() : ValidationError("confusion matrix is empty") {}
};

class NoSentences : public ValidationError {
 public:
  NoSentences() : ValidationError("no sentences to aggregate") {}
};

class UnsortedInput : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace parltopic
