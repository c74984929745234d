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

#include "hmod/memory_bank.hpp"

#include <algorithm>
#include <cmath>

#include "hmod/archive.hpp"
#include "hmod/error.hpp"

namespace hmod {

MemoryBank::MemoryBank(std::size_t nodes, std::size_t discrete_levels,
                       std::size_t memory_dim, double t_start,
                       std::size_t message_dim, double delta_t)
    : nodes_(nodes),
      levels_(discrete_levels + 1),
      memory_dim_(memory_dim),
      message_dim_(message_dim),
      delta_t_(delta_t),
      memories_(nodes * levels_ * memory_dim, 0.0),
      last_update_(nodes * levels_, t_start),
      messages_(nodes * levels_ * message_dim, 0.0) {
  if (nodes == 0 || memory_dim == 0) {
    throw Error(ErrorKind::kUsage, "memory bank needs N >= 1 and d_H >= 1");
  }
  if (!(delta_t > 0.0)) {
    throw Error(ErrorKind::kUsage, "memory bank needs a positive delta_t");
  }
}

double MemoryBank::level_span(std::size_t level) const {
  if (level == 0) return delta_t_;
  return std::ldexp(delta_t_, static_cast<int>(level) - 1);
}

std::size_t MemoryBank::slot(NodeId node, std::size_t level) const {
  if (node >= nodes_ || level >= levels_) {
    throw Error(ErrorKind::kUsage, "memory bank index (node " +
                                       std::to_string(node) + ", level " +
                                       std::to_string(level) + ") out of range");
  }
  return static_cast<std::size_t>(node) * levels_ + level;
}

std::span<const double> MemoryBank::read(NodeId node, std::size_t level) const {
  return std::span(memories_).subspan(slot(node, level) * memory_dim_,
                                      memory_dim_);
}

std::vector<std::span<const double>> MemoryBank::read_all_levels(
    NodeId node) const {
  std::vector<std::span<const double>> out;
  out.reserve(levels_);
  for (std::size_t d = 0; d < levels_; ++d) out.push_back(read(node, d));
  return out;
}

double MemoryBank::last_update(NodeId node, std::size_t level) const {
  return last_update_[slot(node, level)];
}

std::span<const double> MemoryBank::stored_message(NodeId node,
                                                   std::size_t level) const {
  return std::span(messages_).subspan(slot(node, level) * message_dim_,
                                      message_dim_);
}

void MemoryBank::write(NodeId node, std::size_t level,
                       std::span<const double> memory, double t) {
  const auto s = slot(node, level);
  if (memory.size() != memory_dim_) {
    throw Error(ErrorKind::kShape, "memory write of " +
                                       std::to_string(memory.size()) +
                                       " values into d_H = " +
                                       std::to_string(memory_dim_));
  }
  if (t < last_update_[s]) {
    throw Error(ErrorKind::kState,
                "memory write at t=" + std::to_string(t) +
                    " precedes last update " + std::to_string(last_update_[s]) +
                    " (node " + std::to_string(node) + ", level " +
                    std::to_string(level) + ")");
  }
  std::copy(memory.begin(), memory.end(),
            memories_.begin() + static_cast<std::ptrdiff_t>(s * memory_dim_));
  last_update_[s] = t;
}

void MemoryBank::store_message(NodeId node, std::size_t level,
                               std::span<const double> message) {
  const auto s = slot(node, level);
  if (message.size() != message_dim_) {
    throw Error(ErrorKind::kShape, "stored message of " +
                                       std::to_string(message.size()) +
                                       " values into d_M = " +
                                       std::to_string(message_dim_));
  }
  std::copy(message.begin(), message.end(),
            messages_.begin() + static_cast<std::ptrdiff_t>(s * message_dim_));
}

bool MemoryBank::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(memories_.begin(), memories_.end(), finite) &&
         std::all_of(messages_.begin(), messages_.end(), finite);
}

MemoryBank::Snapshot MemoryBank::snapshot() const {
  return Snapshot{nodes_,    levels_,      memory_dim_, message_dim_,
                  memories_, last_update_, messages_};
}

void MemoryBank::restore(const Snapshot& s) {
  if (s.nodes != nodes_ || s.levels != levels_ || s.memory_dim != memory_dim_ ||
      s.message_dim != message_dim_) {
    throw Error(ErrorKind::kState,
                "snapshot shape (N=" + std::to_string(s.nodes) +
                    ", levels=" + std::to_string(s.levels) +
                    ", d_H=" + std::to_string(s.memory_dim) +
                    ") does not match bank (N=" + std::to_string(nodes_) +
                    ", levels=" + std::to_string(levels_) +
                    ", d_H=" + std::to_string(memory_dim_) + ")");
  }
  memories_ = s.memories;
  last_update_ = s.last_update;
  messages_ = s.messages;
}

void MemoryBank::save_to(TensorArchive& archive) const {
  archive.put("bank.memories", {nodes_ * levels_, memory_dim_}, memories_);
  archive.put("bank.last_update", {nodes_, levels_}, last_update_);
  archive.put("bank.messages", {nodes_ * levels_, message_dim_}, messages_);
  archive.put("bank.delta_t", {}, {delta_t_});
}

MemoryBank MemoryBank::load_from(const TensorArchive& archive) {
  const auto& times = archive.get("bank.last_update");
  const auto& memories = archive.get("bank.memories");
  const auto& messages = archive.get("bank.messages");
  if (times.shape.size() != 2 || memories.shape.size() != 2 ||
      messages.shape.size() != 2) {
    throw Error(ErrorKind::kData, "malformed memory bank checkpoint");
  }
  const auto nodes = times.shape[0], levels = times.shape[1];
  if (levels == 0 || memories.shape[0] != nodes * levels ||
      messages.shape[0] != nodes * levels) {
    throw Error(ErrorKind::kData, "inconsistent memory bank checkpoint");
  }
  MemoryBank bank(nodes, levels - 1, memories.shape[1], 0.0, messages.shape[1],
                  archive.get("bank.delta_t").values.at(0));
  bank.memories_ = memories.values;
  bank.last_update_ = times.values;
  bank.messages_ = messages.values;
  return bank;
}

}  // namespace hmod
