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

// Run manifests. Each stage writes `<out>/manifests/<stage>.json` naming
// its inputs and outputs with size and content digest, plus seeds,
// parameters and counts. Timestamps are deliberately absent so reruns
// produce byte-identical manifests. Paths are stored relative to a base
// directory when they lie beneath it.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace parltopic::manifest {

struct FileRecord {
  std::string path;
  std::uintmax_t bytes = 0;
  std::string digest;  // 16 hex digits, FNV-1a 64 over the file bytes
};

/// Streams the file; throws IOFailure when unreadable.
std::string file_digest(const std::filesystem::path& path);

class Manifest {
 public:
  Manifest(std::string stage, std::filesystem::path base_dir);

  Manifest& input(const std::filesystem::path& path);
  Manifest& output(const std::filesystem::path& path);
  Manifest& seed(std::uint64_t seed);
  Manifest& param(const std::string& key, nlohmann::json value);
  Manifest& count(const std::string& key, nlohmann::json value);

  nlohmann::json to_json() const;
  /// Writes `<base>/manifests/<stage>.json` atomically and returns the path.
  std::filesystem::path write() const;

  const std::string& stage() const { return stage_; }

 private:
  FileRecord record(const std::filesystem::path& path) const;

  std::string stage_;
  std::filesystem::path base_;
  std::vector<FileRecord> inputs_;
  std::vector<FileRecord> outputs_;
  std::optional<std::uint64_t> seed_;
  nlohmann::json params_ = nlohmann::json::object();
  nlohmann::json counts_ = nlohmann::json::object();
};

struct ChainProblem {
  std::string stage;
  std::string path;
  std::string detail;
};

/// Checks every manifest under `<base>/manifests`: each recorded file must
/// still exist with the recorded digest, and any input that another stage
/// produced must carry that stage's output digest.
std::vector<ChainProblem> verify_chain(const std::filesystem::path& base_dir);

}  // namespace parltopic::manifest
