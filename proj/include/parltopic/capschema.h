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

// The Comparative Agendas Project major-topic schema, the label sentinels
// used around it (Mix for low-confidence output, do-not-know for human
// annotators), and teacher prompt assembly.

#include <compare>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parltopic::capschema {

/// A schema label, identified by its CAP major-topic code. Only a Schema
/// hands out CapLabels for codes it knows.
class CapLabel {
 public:
  constexpr explicit CapLabel(int code) : code_(code) {}
  constexpr int code() const { return code_; }
  auto operator<=>(const CapLabel&) const = default;

 private:
  int code_;
};

inline constexpr int kOtherCode = 0;
inline constexpr int kPublicLandsCode = 21;

struct LabelInfo {
  CapLabel label;
  std::string name;
  std::string description;
};

class Schema {
 public:
  /// The 22-label major-topic schema shipped with the library.
  static const Schema& builtin();
  /// Reads `code<TAB>name<TAB>description` rows after a header line.
  static Schema parse(std::istream& in);
  static Schema load(const std::filesystem::path& path);

  /// Throws UnknownCode.
  CapLabel from_code(int code) const;
  std::optional<CapLabel> find_code(int code) const;
  /// Case-insensitive exact name match.
  std::optional<CapLabel> find_name(std::string_view name) const;

  const LabelInfo& info(CapLabel label) const;
  const std::string& name(CapLabel label) const { return info(label).name; }
  /// Dense position of the label in file order.
  std::size_t index(CapLabel label) const;
  std::size_t size() const { return labels_.size(); }
  const std::vector<LabelInfo>& labels() const { return labels_; }
  /// All labels sorted by code.
  std::vector<CapLabel> by_code() const;
  /// Labels sorted by code with Other removed: the policy topics proper.
  std::vector<CapLabel> policy_labels() const;

 private:
  std::vector<LabelInfo> labels_;
  std::vector<int> index_of_code_;  // -1 where the code is absent
};

/// Label lookup in the builtin schema.
CapLabel label_from_code(int code);

/// Topic assigned to a classified speech: a schema label, or Mix when the
/// classifier was not confident enough.
class FinalLabel {
 public:
  static FinalLabel mix() { return FinalLabel(std::nullopt); }
  static FinalLabel cap(CapLabel label) { return FinalLabel(label); }

  bool is_mix() const { return !cap_; }
  /// Precondition: !is_mix().
  CapLabel cap() const { return *cap_; }
  std::optional<CapLabel> cap_or_none() const { return cap_; }
  /// "MIX" or the numeric code.
  std::string to_string() const;
  /// Inverse of to_string against a schema; nullopt on unknown text.
  static std::optional<FinalLabel> parse(std::string_view text,
                                         const Schema& schema = Schema::builtin());

  bool operator==(const FinalLabel&) const = default;

 private:
  explicit FinalLabel(std::optional<CapLabel> c) : cap_(c) {}
  std::optional<CapLabel> cap_;
};

/// Label assigned by a human annotator: a schema label or "do not know".
class AnnotatorLabel {
 public:
  static AnnotatorLabel do_not_know() { return AnnotatorLabel(std::nullopt); }
  static AnnotatorLabel cap(CapLabel label) { return AnnotatorLabel(label); }

  bool is_do_not_know() const { return !cap_; }
  CapLabel cap() const { return *cap_; }
  /// Nominal category id for agreement: the code, or -1 for do-not-know.
  int category() const { return cap_ ? cap_->code() : -1; }
  std::string to_string() const;
  /// Accepts a code or the literals "DNK" / "do_not_know" / "do not know".
  static std::optional<AnnotatorLabel> parse(std::string_view text,
                                             const Schema& schema = Schema::builtin());

  bool operator==(const AnnotatorLabel&) const = default;

 private:
  explicit AnnotatorLabel(std::optional<CapLabel> c) : cap_(c) {}
  std::optional<CapLabel> cap_;
};

/// Teacher prompt template with `{label_block}`, `{guidelines}` and
/// `{speech}` placeholders. `{speech}` is mandatory.
class PromptTemplate {
 public:
  /// Throws UnresolvedPlaceholder.
  explicit PromptTemplate(std::string text);
  static PromptTemplate builtin();
  static PromptTemplate load(const std::filesystem::path& path);

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// One line per label: `<code>: <name> - <description>`.
std::string label_block(const Schema& schema);
std::string_view builtin_guidelines();

/// Substitutes the template in a single pass, so text inside the speech is
/// never re-expanded.
std::string build_teacher_prompt(std::string_view speech_text,
                                 const PromptTemplate& tmpl,
                                 const Schema& schema = Schema::builtin(),
                                 std::string_view guidelines = builtin_guidelines());

}  // namespace parltopic::capschema
