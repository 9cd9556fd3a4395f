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

#include "parltopic/student_backends.h"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <cstring>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "parltopic/http_endpoint.h"
#include "parltopic/mining.h"
#include "parltopic/rng.h"

extern char** environ;

namespace parltopic::inference {

MockStudent::MockStudent(Config config) : config_(std::move(config)) {
  for (auto& [kw, code] : config_.keyword_rules) kw = mining::ascii_lower(kw);
}

MockStudent MockStudent::constant(int label_code, double confidence) {
  return MockStudent(Config{label_code, {}, confidence, 0});
}

MockStudent MockStudent::uniform(int label_code, std::uint64_t seed) {
  return MockStudent(Config{label_code, {}, std::nullopt, seed});
}

double MockStudent::hashed_confidence(std::string_view id, std::uint64_t seed) {
  return static_cast<double>(splitmix64(seed ^ fnv1a64(id)) >> 11) * 0x1.0p-53;
}

StudentResult MockStudent::predict_one(const StudentRequest& r) const {
  StudentResult out;
  out.id = r.id;
  int code = config_.label_code;
  if (!config_.keyword_rules.empty()) {
    auto text = mining::ascii_lower(r.text);
    for (const auto& [kw, c] : config_.keyword_rules) {
      if (text.find(kw) != std::string::npos) {
        code = c;
        break;
      }
    }
  }
  out.label_code = code;
  out.confidence = config_.fixed_confidence ? *config_.fixed_confidence
                                            : hashed_confidence(r.id, config_.seed);
  return out;
}

std::vector<StudentResult> MockStudent::predict(std::span<const StudentRequest> batch) {
  std::vector<StudentResult> out;
  out.reserve(batch.size());
  for (const auto& r : batch) out.push_back(predict_one(r));
  return out;
}

// ---------------------------------------------------------------------------

struct ProcessStudent::Child {
  pid_t pid = -1;
  int to_child = -1;
  FILE* from_child = nullptr;
};

ProcessStudent::ProcessStudent(std::vector<std::string> argv) : argv_(std::move(argv)) {
  if (argv_.empty()) throw ValidationError("student command is empty");
}

ProcessStudent::~ProcessStudent() { stop(); }

std::string ProcessStudent::describe() const {
  std::string s = "process:";
  for (const auto& a : argv_) s += " " + a;
  return s;
}

void ProcessStudent::ensure_started() {
  if (child_) return;
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0) throw StudentCallError("pipe() failed");
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw StudentCallError("pipe() failed");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);

  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);
  pid_t pid = -1;
  int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  if (rc != 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    throw StudentCallError("cannot start " + argv_[0] + ": " + std::strerror(rc));
  }
  child_ = std::make_unique<Child>();
  child_->pid = pid;
  child_->to_child = in_pipe[1];
  child_->from_child = fdopen(out_pipe[0], "r");
}

void ProcessStudent::stop() {
  if (!child_) return;
  if (child_->to_child >= 0) close(child_->to_child);
  if (child_->from_child) fclose(child_->from_child);
  int status = 0;
  waitpid(child_->pid, &status, 0);
  child_.reset();
}

std::vector<StudentResult> ProcessStudent::predict(std::span<const StudentRequest> batch) {
  std::lock_guard lock(mu_);
  ensure_started();
  std::string payload;
  for (const auto& r : batch) {
    payload += to_json(r).dump();
    payload += '\n';
  }
  const char* p = payload.data();
  std::size_t left = payload.size();
  while (left) {
    auto n = ::write(child_->to_child, p, left);
    if (n <= 0) {
      stop();
      throw StudentCallError("student process closed its input");
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }

  std::vector<StudentResult> out;
  out.reserve(batch.size());
  char* line = nullptr;
  std::size_t cap = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto len = getline(&line, &cap, child_->from_child);
    if (len < 0) {
      std::free(line);
      stop();
      throw StudentCallError("student process ended mid-batch");
    }
    auto j = nlohmann::json::parse(std::string_view(line, static_cast<std::size_t>(len)), nullptr,
                                   false);
    auto r = j.is_discarded() ? StudentResult{} : student_result_from_json(j);
    if (j.is_discarded()) r.error = "malformed response line";
    // Lines are positional; an error object may omit the id.
    if (r.id.empty()) r.id = batch[i].id;
    out.push_back(std::move(r));
  }
  std::free(line);
  return out;
}

// ---------------------------------------------------------------------------

HttpStudent::HttpStudent(std::string endpoint, std::chrono::seconds timeout)
    : timeout_(timeout) {
  auto ep = split_endpoint(endpoint, "/predict");
  base_ = std::move(ep.base);
  path_ = std::move(ep.path);
}

std::vector<StudentResult> HttpStudent::predict(std::span<const StudentRequest> batch) {
  httplib::Client client(base_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  auto body = nlohmann::json::array();
  for (const auto& r : batch) body.push_back(to_json(r));
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) throw StudentCallError("student HTTP call failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw StudentCallError("student HTTP status " + std::to_string(res->status));
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_array()) {
    throw StudentCallError("student reply is not a JSON array");
  }
  std::vector<StudentResult> out;
  for (const auto& item : reply) out.push_back(student_result_from_json(item));
  return out;
}

}  // namespace parltopic::inference
