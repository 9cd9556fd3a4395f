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

// Helpers shared by the unit and acceptance binaries: scratch directories,
// record builders, file comparison and process memory probes.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "parltopic/corpus.h"

namespace parltopic::testing {

namespace fs = std::filesystem;

/// A fresh directory under the system temp dir, removed on destruction
/// unless PARLTOPIC_KEEP_TMP is set.
class TempDir {
 public:
  explicit TempDir(std::string_view tag = "t") {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("parltopic-" + std::string(tag) + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    if (!std::getenv("PARLTOPIC_KEEP_TMP")) {
      std::error_code ec;
      fs::remove_all(path_, ec);
    }
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(std::string_view name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, std::string_view content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

/// Relative paths of every regular file below `dir`, sorted.
inline std::vector<std::string> list_tree(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).generic_string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// First relative path whose contents differ between the two trees, or
/// nullopt when they hold the same files with the same bytes.
inline std::optional<std::string> first_tree_difference(const fs::path& a, const fs::path& b) {
  auto la = list_tree(a);
  auto lb = list_tree(b);
  if (la != lb) return std::string("<file lists differ>");
  for (const auto& rel : la) {
    if (read_file(a / rel) != read_file(b / rel)) return rel;
  }
  return std::nullopt;
}

inline corpus::Speech make_speech(std::string id, std::string text = "some words",
                                  std::string parliament = "XX") {
  corpus::Speech s;
  s.id = std::move(id);
  s.parliament = std::move(parliament);
  s.text = std::move(text);
  s.date = corpus::Date{2020, 5, 17};
  s.speaker_id = "spk";
  s.speaker_name = "A Speaker";
  s.speaker_gender = corpus::Gender::female;
  s.speaker_role = corpus::Role::regular;
  return s;
}

/// Compares `actual` with the golden file at `path`. With
/// PARLTOPIC_UPDATE_GOLDEN set the file is (re)written instead and the
/// comparison passes. Returns an empty string on match, else a message.
inline std::string golden_mismatch(const fs::path& path, std::string_view actual) {
  if (std::getenv("PARLTOPIC_UPDATE_GOLDEN")) {
    write_text(path, actual);
    return {};
  }
  if (!fs::exists(path)) return "golden file missing: " + path.string();
  const std::string expected = read_file(path);
  if (expected == actual) return {};
  std::size_t i = 0;
  while (i < expected.size() && i < actual.size() && expected[i] == actual[i]) ++i;
  return "golden mismatch in " + path.string() + " at byte " + std::to_string(i);
}

/// A loopback port that was free a moment ago. The probe socket is closed before
/// returning, so nothing in this process keeps listening on it. Returns 0
/// when no socket could be bound.
inline int free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) return 0;
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof addr;
  const bool ok = ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0 &&
                  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0;
  ::close(fd);
  if (!ok) return 0;
  return ntohs(addr.sin_port);
}

/// Value of a `kB` field in /proc/self/status, in bytes.
inline std::size_t proc_status_bytes(std::string_view key) {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.compare(0, key.size(), key) == 0 && line.size() > key.size() &&
        line[key.size()] == ':') {
      return std::stoull(line.substr(key.size() + 1)) * 1024;
    }
  }
  return 0;
}

inline std::size_t peak_rss_bytes() { return proc_status_bytes("VmHWM"); }
inline std::size_t current_rss_bytes() { return proc_status_bytes("VmRSS"); }

/// Resets the VmHWM counter to the current RSS (Linux >= 4.0). Returns
/// false when the kernel refuses.
inline bool reset_peak_rss() {
  std::ofstream out("/proc/self/clear_refs");
  if (!out) return false;
  out << "5";
  out.flush();
  return static_cast<bool>(out);
}

}  // namespace parltopic::testing
