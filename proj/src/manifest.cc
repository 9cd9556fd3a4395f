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

#include "parltopic/manifest.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>

#include "parltopic/common.h"
#include "parltopic/tsv.h"

namespace parltopic::manifest {

namespace fs = std::filesystem;

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOFailure("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

Manifest::Manifest(std::string stage, fs::path base_dir)
    : stage_(std::move(stage)), base_(std::move(base_dir)) {}

FileRecord Manifest::record(const fs::path& path) const {
  FileRecord r;
  const auto full = fs::weakly_canonical(path);
  auto rel = full.lexically_relative(fs::weakly_canonical(base_));
  const bool inside = !rel.empty() && *rel.begin() != "..";
  r.path = (inside ? rel : full).generic_string();
  r.bytes = fs::file_size(path);
  r.digest = file_digest(path);
  return r;
}

Manifest& Manifest::input(const fs::path& path) {
  inputs_.push_back(record(path));
  return *this;
}

Manifest& Manifest::output(const fs::path& path) {
  outputs_.push_back(record(path));
  return *this;
}

Manifest& Manifest::seed(std::uint64_t seed) {
  seed_ = seed;
  return *this;
}

Manifest& Manifest::param(const std::string& key, nlohmann::json value) {
  params_[key] = std::move(value);
  return *this;
}

Manifest& Manifest::count(const std::string& key, nlohmann::json value) {
  counts_[key] = std::move(value);
  return *this;
}

namespace {
nlohmann::json records(const std::vector<FileRecord>& rs) {
  auto a = nlohmann::json::array();
  for (const auto& r : rs) a.push_back({{"path", r.path}, {"bytes", r.bytes}, {"digest", r.digest}});
  return a;
}
}  // namespace

nlohmann::json Manifest::to_json() const {
  nlohmann::json j = {{"stage", stage_},
                      {"tool", "parltopic"},
                      {"version", std::string(kVersion)},
                      {"inputs", records(inputs_)},
                      {"outputs", records(outputs_)},
                      {"params", params_},
                      {"counts", counts_}};
  j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
  return j;
}

fs::path Manifest::write() const {
  auto path = base_ / "manifests" / (stage_ + ".json");
  tsv::AtomicFile f(path);
  f.stream() << to_json().dump(2) << '\n';
  f.commit();
  return path;
}

std::vector<ChainProblem> verify_chain(const fs::path& base_dir) {
  std::vector<ChainProblem> problems;
  const auto dir = base_dir / "manifests";
  if (!fs::is_directory(dir)) {
    problems.push_back({"", dir.string(), "no manifest directory"});
    return problems;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<nlohmann::json> manifests;
  std::map<std::string, std::pair<std::string, std::string>> produced;  // path -> (stage, digest)
  for (const auto& f : files) {
    std::ifstream in(f);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      problems.push_back({f.stem().string(), f.string(), "unparseable manifest"});
      continue;
    }
    for (const auto& o : j.value("outputs", nlohmann::json::array())) {
      produced[o.value("path", "")] = {j.value("stage", ""), o.value("digest", "")};
    }
    manifests.push_back(std::move(j));
  }

  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  for (const auto& j : manifests) {
    const auto stage = j.value("stage", "");
    for (const char* kind : {"inputs", "outputs"}) {
      for (const auto& r : j.value(kind, nlohmann::json::array())) {
        const auto p = r.value("path", "");
        const auto digest = r.value("digest", "");
        const auto full = resolve(p);
        if (std::string_view(kind) == "inputs") {
          auto it = produced.find(p);
          if (it != produced.end() && it->second.second != digest) {
            problems.push_back({stage, p, "input digest differs from stage " + it->second.first});
          }
        }
        if (!fs::exists(full)) {
          problems.push_back({stage, p, "file missing"});
        } else if (file_digest(full) != digest) {
          problems.push_back({stage, p, "file changed since the manifest was written"});
        }
      }
    }
  }
  return problems;
}

}  // namespace parltopic::manifest
