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

#include "hmod/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "hmod/error.hpp"

namespace hmod {

static_assert(std::endian::native == std::endian::little,
              "archive IO assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'H', 'M', 'O', 'D', 'T', 'N', 'S', 'R'};

template <class T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(ErrorKind::kIo, "truncated archive " + path.string());
  }
  return value;
}

}  // namespace

void TensorArchive::put(const std::string& name, Shape shape,
                        std::vector<double> values) {
  if (shape_size(shape) != values.size()) {
    throw Error(ErrorKind::kShape, "archive entry '" + name + "' shape " +
                                       shape_string(shape) + " mismatches " +
                                       std::to_string(values.size()) +
                                       " values");
  }
  entries_[name] = ArchiveEntry{std::move(shape), std::move(values)};
}

bool TensorArchive::contains(const std::string& name) const {
  return entries_.contains(name);
}

const ArchiveEntry& TensorArchive::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error(ErrorKind::kData, "archive has no entry '" + name + "'");
  }
  return it->second;
}

void TensorArchive::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kArchiveVersion);
  write_pod(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, entry] : entries_) {
    write_pod(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod(out, static_cast<std::uint32_t>(entry.shape.size()));
    for (auto d : entry.shape) write_pod(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(entry.values.data()),
              static_cast<std::streamsize>(entry.values.size() * sizeof(double)));
  }
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

TensorArchive TensorArchive::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::kData, path.string() + " is not a tensor archive");
  }
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kArchiveVersion) {
    throw Error(ErrorKind::kData, "unsupported archive version " +
                                      std::to_string(version) + " in " +
                                      path.string());
  }
  const auto count = read_pod<std::uint32_t>(in, path);
  TensorArchive archive;
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto name_len = read_pod<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw Error(ErrorKind::kIo, "truncated archive " + path.string());
    }
    const auto rank = read_pod<std::uint32_t>(in, path);
    Shape shape(rank);
    for (auto& d : shape) d = read_pod<std::uint64_t>(in, path);
    std::vector<double> values(shape_size(shape));
    if (!in.read(reinterpret_cast<char*>(values.data()),
                 static_cast<std::streamsize>(values.size() * sizeof(double)))) {
      throw Error(ErrorKind::kIo, "truncated archive " + path.string());
    }
    archive.put(name, std::move(shape), std::move(values));
  }
  return archive;
}

}  // namespace hmod
