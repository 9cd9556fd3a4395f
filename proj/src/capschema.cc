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

#include "parltopic/capschema.h"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "parltopic/common.h"
#include "parltopic/resources.h"
#include "parltopic/tsv.h"

namespace parltopic::capschema {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls on_text for literal spans and on_placeholder for each `{name}`.
template <class OnText, class OnPlaceholder>
void scan_template(std::string_view t, OnText on_text, OnPlaceholder on_placeholder) {
  std::size_t pos = 0;
  while (pos < t.size()) {
    auto open = t.find('{', pos);
    if (open == std::string_view::npos) break;
    auto close = open + 1;
    while (close < t.size() && is_placeholder_char(t[close])) ++close;
    if (close < t.size() && t[close] == '}' && close > open + 1) {
      on_text(t.substr(pos, open - pos));
      on_placeholder(t.substr(open + 1, close - open - 1));
      pos = close + 1;
    } else {
      on_text(t.substr(pos, open + 1 - pos));
      pos = open + 1;
    }
  }
  on_text(t.substr(std::min(pos, t.size())));
}

}  // namespace

const Schema& Schema::builtin() {
  static const Schema schema = [] {
    std::istringstream in{std::string(resources::cap_labels_tsv())};
    return parse(in);
  }();
  return schema;
}

Schema Schema::parse(std::istream& in) {
  Schema s;
  tsv::LineReader lines(in);
  std::string line;
  bool header = true;
  while (lines.next(line)) {
    if (header) {
      header = false;
      continue;
    }
    if (tsv::trim(line).empty()) continue;
    auto cols = tsv::split(line);
    auto code = cols.empty() ? std::nullopt : tsv::parse_int(cols[0]);
    if (cols.size() != 3 || !code || *code < 0 || *code > 100000) {
      throw ValidationError("label schema line " + std::to_string(lines.line_no()) +
                            ": expected code<TAB>name<TAB>description");
    }
    auto c = static_cast<int>(*code);
    if (static_cast<std::size_t>(c) >= s.index_of_code_.size()) {
      s.index_of_code_.resize(c + 1, -1);
    }
    if (s.index_of_code_[c] != -1) {
      throw ValidationError("label schema: duplicate code " + std::to_string(c));
    }
    std::string name(tsv::trim(tsv::unescape(cols[1])));
    if (s.find_name(name)) throw ValidationError("label schema: duplicate name " + name);
    s.index_of_code_[c] = static_cast<int>(s.labels_.size());
    s.labels_.push_back({CapLabel(c), std::move(name), tsv::unescape(cols[2])});
  }
  if (s.labels_.empty()) throw ValidationError("label schema is empty");
  return s;
}

Schema Schema::load(const std::filesystem::path& path) {
  auto in = tsv::open_input(path);
  return parse(in);
}

std::optional<CapLabel> Schema::find_code(int code) const {
  if (code < 0 || static_cast<std::size_t>(code) >= index_of_code_.size() ||
      index_of_code_[code] < 0) {
    return std::nullopt;
  }
  return CapLabel(code);
}

CapLabel Schema::from_code(int code) const {
  if (auto l = find_code(code)) return *l;
  throw UnknownCode(code);
}

std::optional<CapLabel> Schema::find_name(std::string_view name) const {
  for (const auto& l : labels_) {
    if (iequals(l.name, name)) return l.label;
  }
  return std::nullopt;
}

const LabelInfo& Schema::info(CapLabel label) const { return labels_[index(label)]; }

std::size_t Schema::index(CapLabel label) const {
  if (!find_code(label.code())) throw UnknownCode(label.code());
  return static_cast<std::size_t>(index_of_code_[label.code()]);
}

std::vector<CapLabel> Schema::by_code() const {
  std::vector<CapLabel> out;
  for (const auto& l : labels_) out.push_back(l.label);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CapLabel> Schema::policy_labels() const {
  auto out = by_code();
  std::erase(out, CapLabel(kOtherCode));
  return out;
}

CapLabel label_from_code(int code) { return Schema::builtin().from_code(code); }

std::string FinalLabel::to_string() const {
  return cap_ ? std::to_string(cap_->code()) : std::string("MIX");
}

std::optional<FinalLabel> FinalLabel::parse(std::string_view text, const Schema& schema) {
  text = tsv::trim(text);
  if (iequals(text, "MIX")) return mix();
  auto code = tsv::parse_int(text);
  if (!code || *code < 0 || *code > 100000) return std::nullopt;
  auto label = schema.find_code(static_cast<int>(*code));
  if (!label) return std::nullopt;
  return cap(*label);
}

std::string AnnotatorLabel::to_string() const {
  return cap_ ? std::to_string(cap_->code()) : std::string("DNK");
}

std::optional<AnnotatorLabel> AnnotatorLabel::parse(std::string_view text,
                                                    const Schema& schema) {
  text = tsv::trim(text);
  if (iequals(text, "DNK") || iequals(text, "do_not_know") ||
      iequals(text, "do not know")) {
    return do_not_know();
  }
  auto code = tsv::parse_int(text);
  if (!code || *code < 0 || *code > 100000) return std::nullopt;
  auto label = schema.find_code(static_cast<int>(*code));
  if (!label) return std::nullopt;
  return cap(*label);
}

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
  bool has_speech = false;
  scan_template(
      text_, [](std::string_view) {},
      [&](std::string_view name) {
        if (name == "speech") {
          has_speech = true;
        } else if (name != "label_block" && name != "guidelines") {
          throw UnresolvedPlaceholder("unknown placeholder {" + std::string(name) + "}");
        }
      });
  if (!has_speech) throw UnresolvedPlaceholder("template lacks the {speech} placeholder");
}

PromptTemplate PromptTemplate::builtin() {
  return PromptTemplate(std::string(resources::teacher_prompt_txt()));
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  auto in = tsv::open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return PromptTemplate(ss.str());
}

std::string label_block(const Schema& schema) {
  std::string out;
  for (const auto& l : schema.labels()) {
    out += std::to_string(l.label.code());
    out += ": ";
    out += l.name;
    out += " - ";
    out += l.description;
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string_view builtin_guidelines() {
  auto g = resources::guidelines_txt();
  while (!g.empty() && (g.back() == '\n' || g.back() == '\r')) g.remove_suffix(1);
  return g;
}

std::string build_teacher_prompt(std::string_view speech_text, const PromptTemplate& tmpl,
                                 const Schema& schema, std::string_view guidelines) {
  std::string out;
  out.reserve(tmpl.text().size() + speech_text.size() + 8192);
  const std::string labels = label_block(schema);
  scan_template(
      tmpl.text(), [&](std::string_view t) { out += t; },
      [&](std::string_view name) {
        if (name == "speech") {
          out += speech_text;
        } else if (name == "label_block") {
          out += labels;
        } else {
          out += guidelines;
        }
      });
  return out;
}

}  // namespace parltopic::capschema
