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

#include "parltopic/teacher_backends.h"

#include <algorithm>
#include <cctype>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "parltopic/common.h"
#include "parltopic/http_endpoint.h"
#include "parltopic/rng.h"

namespace parltopic::teacher {

MockTeacher MockTeacher::constant(std::string reply) {
  MockTeacher m;
  m.mode_ = Mode::constant;
  m.reply_ = std::move(reply);
  return m;
}

MockTeacher MockTeacher::hashed(std::uint64_t seed, const capschema::Schema& schema) {
  MockTeacher m;
  m.mode_ = Mode::hash;
  m.seed_ = seed;
  m.schema_ = &schema;
  return m;
}

MockTeacher MockTeacher::keyword(std::vector<std::pair<std::string, int>> rules,
                                 int fallback_code) {
  MockTeacher m;
  m.mode_ = Mode::keyword;
  for (auto& [kw, code] : rules) {
    std::transform(kw.begin(), kw.end(), kw.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  m.rules_ = std::move(rules);
  m.fallback_code_ = fallback_code;
  return m;
}

int MockTeacher::hashed_code(std::string_view id, std::uint64_t seed,
                             const capschema::Schema& schema) {
  auto codes = schema.by_code();
  return codes[splitmix64(seed ^ fnv1a64(id)) % codes.size()].code();
}

TeacherResponse MockTeacher::complete(const TeacherRequest& request) {
  switch (mode_) {
    case Mode::constant:
      return TeacherResponse::success(request.id, reply_);
    case Mode::hash:
      return TeacherResponse::success(request.id,
                                      std::to_string(hashed_code(request.id, seed_, *schema_)));
    case Mode::keyword: {
      std::string text(request.speech_text);
      std::transform(text.begin(), text.end(), text.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      for (const auto& [kw, code] : rules_) {
        if (text.find(kw) != std::string::npos) {
          return TeacherResponse::success(request.id, std::to_string(code));
        }
      }
      return TeacherResponse::success(request.id, std::to_string(fallback_code_));
    }
  }
  return TeacherResponse::failure(request.id, ErrorKind::permanent, "bad mock mode");
}

std::string MockTeacher::describe() const {
  switch (mode_) {
    case Mode::constant: return "mock:constant";
    case Mode::hash: return "mock:hash:" + std::to_string(seed_);
    default: return "mock:keyword";
  }
}

HttpTeacher::HttpTeacher(HttpTeacherConfig config) : config_(std::move(config)) {
  auto ep = split_endpoint(config_.endpoint);
  base_ = std::move(ep.base);
  path_ = std::move(ep.path);
}

TeacherResponse HttpTeacher::complete(const TeacherRequest& request) {
  httplib::Client client(base_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);
  nlohmann::json body = {{"model", config_.model}, {"prompt", request.prompt}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    return TeacherResponse::failure(request.id, ErrorKind::unavailable,
                                    httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    return TeacherResponse::failure(request.id, ErrorKind::transient,
                                    "HTTP " + std::to_string(res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    return TeacherResponse::failure(request.id, ErrorKind::permanent,
                                    "HTTP " + std::to_string(res->status));
  }
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("text") ||
      !reply["text"].is_string()) {
    return TeacherResponse::failure(request.id, ErrorKind::permanent,
                                    "reply lacks a string field 'text'");
  }
  return TeacherResponse::success(request.id, reply["text"].get<std::string>());
}

std::string HttpTeacher::describe() const { return "http:" + config_.endpoint; }

}  // namespace parltopic::teacher
