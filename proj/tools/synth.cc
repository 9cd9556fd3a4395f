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

// Writes the synthetic multi-parliament fixture: <P>.tsv speech files and
// <P>_sentences.tsv sentiment files.

#include <iostream>

#include <CLI11.hpp>

#include "parltopic/synthetic.h"

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic parliamentary corpora", "parltopic-synth"};
  std::string out;
  std::vector<std::string> parliaments;
  std::size_t speeches = 1600;
  std::uint64_t seed = 1;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--parliaments", parliaments, "Parliament codes (default: all 29)")->delimiter(',');
  app.add_option("--speeches", speeches, "Speeches per parliament")->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (parliaments.empty()) parliaments = parltopic::synthetic::default_parliaments();
  try {
    auto files = parltopic::synthetic::write_fixture(out, parliaments, speeches, seed);
    std::cout << files.speeches << " speeches and " << files.sentences << " sentences in "
              << parliaments.size() << " parliaments\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
