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

// A stand-in student model speaking the wire contract.
//
// stdio mode reads one JSON request per line and answers one JSON line per
// request, in order. A line that is not a valid request gets an
// {"error": ...} object. With --port it serves POST /predict instead,
// taking and returning JSON arrays.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "parltopic/student_backends.h"
#include "parltopic/synthetic.h"

namespace {

using parltopic::inference::MockStudent;
using parltopic::inference::StudentRequest;

nlohmann::json answer(const MockStudent& student, const nlohmann::json& req) {
  if (!req.is_object() || !req.contains("id") || !req["id"].is_string() || !req.contains("text") ||
      !req["text"].is_string()) {
    nlohmann::json err = {{"error", "request needs string fields id and text"}};
    if (req.is_object() && req.contains("id") && req["id"].is_string()) err["id"] = req["id"];
    return err;
  }
  auto r = student.predict_one(StudentRequest{req["id"].get<std::string>(), req["text"].get<std::string>()});
  return {{"id", r.id}, {"label_code", *r.label_code}, {"confidence", r.confidence}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mock student model for the JSON-lines / HTTP contract", "parltopic-mock-student"};
  MockStudent::Config config;
  bool keyword_rules = true;
  std::optional<double> confidence;
  int port = 0;
  std::string host = "127.0.0.1";
  app.add_option("--label-code", config.label_code, "Label when no keyword matches")->capture_default_str();
  app.add_flag("--keyword-rules,!--no-keyword-rules", keyword_rules, "Use the synthetic keyword table");
  app.add_option("--confidence", confidence, "Fixed confidence (default: hashed from the id)");
  app.add_option("--seed", config.seed)->capture_default_str();
  app.add_option("--port", port, "Serve HTTP on this port instead of stdio");
  app.add_option("--host", host)->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (keyword_rules) config.keyword_rules = parltopic::synthetic::keyword_rules();
  config.fixed_confidence = confidence;
  const MockStudent student(config);

  if (port > 0) {
    httplib::Server server;
    server.Post("/predict", [&](const httplib::Request& req, httplib::Response& res) {
      auto body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_array()) {
        res.status = 400;
        res.set_content(R"({"error":"expected a JSON array"})", "application/json");
        return;
      }
      auto out = nlohmann::json::array();
      for (const auto& item : body) out.push_back(answer(student, item));
      res.set_content(out.dump(), "application/json");
    });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok", "text/plain");
    });
    std::cerr << "listening on " << host << ":" << port << '\n';
    return server.listen(host, port) ? 0 : 2;
  }

  std::ios::sync_with_stdio(false);
  std::string line;
  while (std::getline(std::cin, line)) {
    auto req = nlohmann::json::parse(line, nullptr, false);
    auto out = req.is_discarded() ? nlohmann::json{{"error", "malformed JSON"}} : answer(student, req);
    std::cout << out.dump() << '\n' << std::flush;
  }
  return 0;
}
