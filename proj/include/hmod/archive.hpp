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

// Named-tensor container used for parameter and memory-bank checkpoints.
//
// Layout (all integers little-endian):
//   bytes 0..7   magic "HMODTNSR"
//   u32          format version (currently 1)
//   u32          entry count
//   per entry, in ascending name order:
//     u32        name length, then the UTF-8 name bytes
//     u32        rank, then rank x u64 dimensions
//     f64 x prod(dims) raw IEEE-754 values, row-major

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hmod/tensor.hpp"

namespace hmod {

inline constexpr std::uint32_t kArchiveVersion = 1;

struct ArchiveEntry {
  Shape shape;
  std::vector<double> values;
};

class TensorArchive {
 public:
  void put(const std::string& name, Shape shape, std::vector<double> values);
  bool contains(const std::string& name) const;
  const ArchiveEntry& get(const std::string& name) const;
  const std::map<std::string, ArchiveEntry>& entries() const { return entries_; }

  void save(const std::filesystem::path& path) const;
  static TensorArchive load(const std::filesystem::path& path);

 private:
  std::map<std::string, ArchiveEntry> entries_;
};

}  // namespace hmod
