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

// Tab-separated text helpers shared by every file format in the toolkit.
//
// Fields never contain raw tabs or newlines: they are written as the two
// character sequences `\t` and `\n` (plus `\r` and `\\`), and unescaped on
// read. Lines end with a single `\n`.

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parltopic::tsv {

std::string escape(std::string_view field);
std::string unescape(std::string_view field);

/// Splits on raw tabs; does not unescape.
std::vector<std::string_view> split(std::string_view line);

/// Appends escaped fields joined by tabs and a trailing newline.
void append_row(std::string& out, const std::vector<std::string>& fields);
std::string join_row(const std::vector<std::string>& fields);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
/// Fixed-point rendering, used where human-facing tables want stable width.
std::string format_fixed(double value, int decimals);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text);

/// Reads `\n`-terminated lines, dropping a trailing `\r`. Tracks the
/// 1-based line number of the line most recently returned.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line);
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

/// Header-indexed access to the columns of one row.
class HeaderIndex {
 public:
  HeaderIndex() = default;
  explicit HeaderIndex(std::vector<std::string> names);

  std::optional<std::size_t> find(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

/// Writes to `<path>.tmp` and renames over `path` on commit(), so readers
/// never observe a partially written file. An uncommitted file is removed.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return out_; }
  /// Flushes, closes and renames; returns the final size in bytes.
  std::uintmax_t commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

/// Opens `path` for reading or throws IOFailure.
std::ifstream open_input(const std::filesystem::path& path);

/// Writes a whole string atomically.
std::uintmax_t write_file(const std::filesystem::path& path,
                          std::string_view content);

}  // namespace parltopic::tsv
