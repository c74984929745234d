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

#include "hmod/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hmod/error.hpp"

namespace hmod {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& source) {
  KeyValueFile file;
  file.source_ = source;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kConfig, source + ":" + std::to_string(number) +
                                          ": expected 'key = value'");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw Error(ErrorKind::kConfig,
                  source + ":" + std::to_string(number) + ": empty key");
    }
    if (file.entries_.contains(key)) {
      throw Error(ErrorKind::kConfig, source + ":" + std::to_string(number) +
                                          ": duplicate key '" + key + "'");
    }
    file.entries_[key] = Entry{value, number};
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return parse(in, path.string());
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  entries_[key] = Entry{value, 0};
}

bool KeyValueFile::has(const std::string& key) const {
  return entries_.contains(key);
}

const KeyValueFile::Entry* KeyValueFile::find(const std::string& key) {
  consumed_.insert(key);
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string KeyValueFile::get_string(const std::string& key,
                                     const std::string& fallback) {
  const auto* e = find(key);
  return e ? e->value : fallback;
}

namespace {

template <class T>
T parse_number(const std::string& text, const std::string& key,
               const char* kind) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::kConfig, "key '" + key + "' expects " + kind +
                                        ", got '" + text + "'");
  }
  return value;
}

}  // namespace

double KeyValueFile::get_double(const std::string& key, double fallback) {
  const auto* e = find(key);
  return e ? parse_number<double>(e->value, key, "a real number") : fallback;
}

std::int64_t KeyValueFile::get_int(const std::string& key,
                                   std::int64_t fallback) {
  const auto* e = find(key);
  return e ? parse_number<std::int64_t>(e->value, key, "an integer") : fallback;
}

std::uint64_t KeyValueFile::get_uint(const std::string& key,
                                     std::uint64_t fallback) {
  const auto* e = find(key);
  return e ? parse_number<std::uint64_t>(e->value, key,
                                         "a non-negative integer")
           : fallback;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) {
  const auto* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1") return true;
  if (e->value == "false" || e->value == "0") return false;
  throw Error(ErrorKind::kConfig,
              "key '" + key + "' expects true/false, got '" + e->value + "'");
}

std::vector<std::string> KeyValueFile::keys_with_prefix(
    const std::string& prefix) {
  std::vector<std::string> out;
  for (const auto& [key, _] : entries_) {
    if (key.starts_with(prefix)) {
      out.push_back(key);
      consumed_.insert(key);
    }
  }
  return out;
}

std::string KeyValueFile::raw(const std::string& key) {
  const auto* e = find(key);
  if (!e) throw Error(ErrorKind::kConfig, "missing key '" + key + "'");
  return e->value;
}

void KeyValueFile::reject_unknown() const {
  for (const auto& [key, entry] : entries_) {
    if (!consumed_.contains(key)) {
      std::string where = source_;
      if (entry.line) where += ":" + std::to_string(entry.line);
      throw Error(ErrorKind::kConfig, where + ": unknown key '" + key + "'");
    }
  }
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace hmod
