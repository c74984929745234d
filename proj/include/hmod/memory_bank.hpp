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

#include <cstddef>
#include <span>
#include <vector>

#include "hmod/trip_store.hpp"

namespace hmod {

class TensorArchive;

// Per-node hierarchy of D+1 memories. Level 0 is the continuous-time memory,
// level d >= 1 is a discrete memory refreshed every 2^(d-1) * delta_t
// seconds. Alongside each memory the bank keeps its last update time and the
// last fused message committed to it.
class MemoryBank {
 public:
  struct Snapshot {
    std::size_t nodes = 0, levels = 0, memory_dim = 0, message_dim = 0;
    std::vector<double> memories, last_update, messages;
    bool operator==(const Snapshot&) const = default;
  };

  MemoryBank() = default;
  // `discrete_levels` is D; the bank holds D+1 levels.
  MemoryBank(std::size_t nodes, std::size_t discrete_levels,
             std::size_t memory_dim, double t_start,
             std::size_t message_dim = 0, double delta_t = 1800.0);

  std::size_t node_count() const { return nodes_; }
  std::size_t level_count() const { return levels_; }
  std::size_t discrete_levels() const { return levels_ - 1; }
  std::size_t memory_dim() const { return memory_dim_; }
  std::size_t message_dim() const { return message_dim_; }
  double delta_t() const { return delta_t_; }
  // 2^(d-1) * delta_t for d >= 1; delta_t for the continuous level.
  double level_span(std::size_t level) const;

  std::span<const double> read(NodeId node, std::size_t level) const;
  std::vector<std::span<const double>> read_all_levels(NodeId node) const;
  double last_update(NodeId node, std::size_t level) const;
  std::span<const double> stored_message(NodeId node, std::size_t level) const;

  // Replaces the memory and advances last_update. Throws kState if
  // t < last_update(node, level).
  void write(NodeId node, std::size_t level, std::span<const double> memory,
             double t);
  void store_message(NodeId node, std::size_t level,
                     std::span<const double> message);

  bool all_finite() const;

  Snapshot snapshot() const;
  // Throws kState when the snapshot was taken from a differently shaped bank.
  void restore(const Snapshot& snapshot);

  void save_to(TensorArchive& archive) const;
  static MemoryBank load_from(const TensorArchive& archive);

 private:
  std::size_t slot(NodeId node, std::size_t level) const;

  std::size_t nodes_ = 0;
  std::size_t levels_ = 0;
  std::size_t memory_dim_ = 0;
  std::size_t message_dim_ = 0;
  double delta_t_ = 1800.0;
  std::vector<double> memories_;
  std::vector<double> last_update_;
  std::vector<double> messages_;
};

}  // namespace hmod
