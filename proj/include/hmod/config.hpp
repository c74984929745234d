// Copyright 2026 The hmod Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Flat `key = value` text files. `#` starts a comment, blank lines are
// ignored, keys are unique. Typed getters mark keys as consumed so callers
// can reject anything they did not understand.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace hmod {

// `key = value` lines, `#` comments. One pair of surrounding double quotes
// is stripped from values.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in, const std::string& source);
  static KeyValueFile load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);

  // Keys beginning with `prefix`, in sorted order; marks them consumed.
  std::vector<std::string> keys_with_prefix(const std::string& prefix);
  std::string raw(const std::string& key);

  // Throws kConfig naming the first key no getter asked for.
  void reject_unknown() const;

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  const Entry* find(const std::string& key);

  std::string source_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> consumed_;
};

// Splits on runs of whitespace.
std::vector<std::string> split_words(const std::string& text);

}  // namespace hmod
