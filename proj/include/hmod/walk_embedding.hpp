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
#include <optional>
#include <vector>

#include "hmod/dims.hpp"
#include "hmod/memory_bank.hpp"
#include "hmod/nn.hpp"
#include "hmod/random.hpp"
#include "hmod/tensor.hpp"
#include "hmod/trip_store.hpp"

namespace hmod {

namespace walk_params {
inline constexpr const char* kOrigin = "walk.w_origin";
inline constexpr const char* kDestination = "walk.w_destination";
inline constexpr const char* kAttention = "walk.w_attention";
inline constexpr const char* kAttentionVector = "walk.attention";
}  // namespace walk_params

void register_walk_params(ParamSet& params, const ModelDims& dims);

enum class Role { kOrigin, kDestination };
// Even walks leave the anchor along a forward edge, odd walks along a
// reverse edge.
enum class Parity { kEven, kOdd };

struct WalkSample {
  std::vector<NodeId> nodes;  // anchor excluded; empty if the first step failed
  std::vector<Role> roles;
  Parity parity = Parity::kEven;
  std::size_t level = 0;
  double anchor_time = 0.0;
  std::size_t sampled_steps = 0;  // positions past this one are padding

  bool empty() const { return nodes.empty(); }
};

struct WalkOptions {
  std::size_t length = 4;   // omega
  std::size_t pairs = 2;    // epsilon; 2 * pairs walks per anchor
  double smoothing = 0.01;  // additive demand smoothing for discrete levels
};

// Where the next hop of a walk comes from. Level 0 draws timestamped trips
// from the event log, weighted by recency; discrete levels draw from the
// level's OD matrix. Holds references: the log or matrix must outlive it.
class WalkSource {
 public:
  static WalkSource continuous(const EventLog& log, double horizon,
                               double timescale);
  static WalkSource discrete(const ODMatrix& od, double smoothing);

  bool is_continuous() const { return log_ != nullptr; }
  std::size_t node_count() const;

  struct Step {
    NodeId node;
    double time;  // new t-hat; unchanged for discrete levels
  };

  // One hop from `current`. Forward hops land on a destination, reverse hops
  // on an origin. nullopt when a continuous hop has no candidate trip.
  std::optional<Step> sample_step(NodeId current, Direction direction,
                                  double t_hat, Rng& rng) const;

  // Closed-form probability of landing on each node from `current`.
  // All zeros when no candidate exists.
  std::vector<double> step_distribution(NodeId current, Direction direction,
                                        double t_hat) const;

 private:
  const EventLog* log_ = nullptr;
  const ODMatrix* od_ = nullptr;
  double horizon_ = 0.0;
  double timescale_ = 1.0;
  double smoothing_ = 0.0;
};

// 2 * pairs walks of `length` hops from `anchor`; walks [0, pairs) are even,
// the rest odd. Roles alternate along every walk. A walk that runs out of
// candidates mid-way repeats its last node (roles keep alternating).
std::vector<WalkSample> sample_walks(const WalkSource& source, NodeId anchor,
                                     std::size_t level, double t,
                                     const WalkOptions& options, Rng& rng);

// (sum_{j even} W_a H_j + sum_{j odd} W_b H_j) / (2 * length), where
// (W_a, W_b) = (W_O, W_D) for even walks and (W_D, W_O) for odd walks and
// H_j is the level-`walk.level` memory of the j-th node.
Tensor intra_walk_embed(const WalkSample& walk, const MemoryBank& bank,
                        const ParamSet& params);

// alpha_i = a . (W_att E_i), beta = softmax(alpha).
Tensor attention_weights(const std::vector<Tensor>& embeddings,
                         const ParamSet& params);
// Z = sum_i beta_i E_i
Tensor inter_walk_attend(const std::vector<Tensor>& embeddings,
                         const ParamSet& params);

// Sample, embed and attend. Walks with no reachable hop are dropped; if all
// are, the result is a zero vector of width d_H.
Tensor embed_node(const WalkSource& source, NodeId anchor, std::size_t level,
                  double t, const MemoryBank& bank, const ParamSet& params,
                  const WalkOptions& options, Rng& rng);

}  // namespace hmod
