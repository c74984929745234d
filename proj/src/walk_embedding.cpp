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

#include "hmod/walk_embedding.hpp"

#include <cmath>

#include "hmod/error.hpp"

namespace hmod {

namespace wp = walk_params;

void register_walk_params(ParamSet& params, const ModelDims& dims) {
  const auto h = dims.memory_dim;
  params.add(wp::kOrigin, {h, h});
  params.add(wp::kDestination, {h, h});
  params.add(wp::kAttention, {h, h});
  params.add(wp::kAttentionVector, {h});
}

WalkSource WalkSource::continuous(const EventLog& log, double horizon,
                                  double timescale) {
  if (!(horizon > 0.0) || !(timescale > 0.0)) {
    throw Error(ErrorKind::kUsage,
                "walk source needs positive horizon and timescale");
  }
  WalkSource s;
  s.log_ = &log;
  s.horizon_ = horizon;
  s.timescale_ = timescale;
  return s;
}

WalkSource WalkSource::discrete(const ODMatrix& od, double smoothing) {
  if (!(smoothing > 0.0)) {
    throw Error(ErrorKind::kUsage, "walk smoothing must be positive");
  }
  WalkSource s;
  s.od_ = &od;
  s.smoothing_ = smoothing;
  return s;
}

std::size_t WalkSource::node_count() const {
  return log_ ? log_->node_count() : od_->nodes;
}

std::optional<WalkSource::Step> WalkSource::sample_step(NodeId current,
                                                        Direction direction,
                                                        double t_hat,
                                                        Rng& rng) const {
  if (log_) {
    const auto idx = log_->candidate_indices(current, direction, t_hat, horizon_);
    if (idx.empty()) return std::nullopt;
    const auto events = log_->events();
    std::vector<double> weights(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      weights[k] = std::exp(-(t_hat - events[idx[k]].timestamp) / timescale_);
    }
    const auto pick = rng.categorical(weights);
    if (pick == weights.size()) return std::nullopt;  // all weights underflowed
    const auto& e = events[idx[pick]];
    return Step{direction == Direction::kForward ? e.destination : e.origin,
                e.timestamp};
  }
  const auto n = od_->nodes;
  std::vector<double> weights(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double demand = direction == Direction::kForward ? (*od_)(current, j)
                                                           : (*od_)(j, current);
    weights[j] = demand + smoothing_;
  }
  return Step{static_cast<NodeId>(rng.categorical(weights)), t_hat};
}

std::vector<double> WalkSource::step_distribution(NodeId current,
                                                  Direction direction,
                                                  double t_hat) const {
  std::vector<double> p(node_count(), 0.0);
  double total = 0.0;
  if (log_) {
    const auto events = log_->events();
    for (auto i : log_->candidate_indices(current, direction, t_hat, horizon_)) {
      const auto& e = events[i];
      const double w = std::exp(-(t_hat - e.timestamp) / timescale_);
      p[direction == Direction::kForward ? e.destination : e.origin] += w;
      total += w;
    }
  } else {
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] = (direction == Direction::kForward ? (*od_)(current, j)
                                               : (*od_)(j, current)) +
             smoothing_;
      total += p[j];
    }
  }
  if (total > 0.0) {
    for (auto& v : p) v /= total;
  }
  return p;
}

std::vector<WalkSample> sample_walks(const WalkSource& source, NodeId anchor,
                                     std::size_t level, double t,
                                     const WalkOptions& options, Rng& rng) {
  if (options.length == 0 || options.pairs == 0) {
    throw Error(ErrorKind::kUsage, "walks need length >= 1 and pairs >= 1");
  }
  std::vector<WalkSample> walks;
  walks.reserve(2 * options.pairs);
  for (std::size_t w = 0; w < 2 * options.pairs; ++w) {
    WalkSample walk;
    walk.parity = w < options.pairs ? Parity::kEven : Parity::kOdd;
    walk.level = level;
    walk.anchor_time = t;
    Direction direction = walk.parity == Parity::kEven ? Direction::kForward
                                                       : Direction::kReverse;
    NodeId current = anchor;
    double t_hat = t;
    bool stuck = false;
    for (std::size_t pos = 0; pos < options.length; ++pos) {
      if (!stuck) {
        if (auto step = source.sample_step(current, direction, t_hat, rng)) {
          current = step->node;
          t_hat = step->time;
          ++walk.sampled_steps;
        } else {
          stuck = true;
          if (pos == 0) break;
        }
      }
      walk.nodes.push_back(current);
      walk.roles.push_back(direction == Direction::kForward ? Role::kDestination
                                                            : Role::kOrigin);
      direction = direction == Direction::kForward ? Direction::kReverse
                                                   : Direction::kForward;
    }
    walks.push_back(std::move(walk));
  }
  return walks;
}

Tensor intra_walk_embed(const WalkSample& walk, const MemoryBank& bank,
                        const ParamSet& params) {
  const auto dim = bank.memory_dim();
  if (walk.empty()) return Tensor::zeros({dim});
  std::vector<double> even(dim, 0.0), odd(dim, 0.0);
  for (std::size_t j = 0; j < walk.nodes.size(); ++j) {
    auto& acc = j % 2 == 0 ? even : odd;
    const auto h = bank.read(walk.nodes[j], walk.level);
    for (std::size_t k = 0; k < dim; ++k) acc[k] += h[k];
  }
  const bool even_walk = walk.parity == Parity::kEven;
  const auto& w_even = params.get(even_walk ? wp::kOrigin : wp::kDestination);
  const auto& w_odd = params.get(even_walk ? wp::kDestination : wp::kOrigin);
  Tensor total = add(matmul(w_even, Tensor::vector(even)),
                     matmul(w_odd, Tensor::vector(odd)));
  return scale(total, 1.0 / (2.0 * static_cast<double>(walk.nodes.size())));
}

Tensor attention_weights(const std::vector<Tensor>& embeddings,
                         const ParamSet& params) {
  if (embeddings.empty()) {
    throw Error(ErrorKind::kUsage, "attention over an empty walk set");
  }
  const auto& w = params.get(wp::kAttention);
  const auto& a = params.get(wp::kAttentionVector);
  std::vector<Tensor> scores;
  scores.reserve(embeddings.size());
  for (const auto& e : embeddings) {
    scores.push_back(reshape(dot(a, matmul(w, e)), {1}));
  }
  return softmax(concat(scores));
}

Tensor inter_walk_attend(const std::vector<Tensor>& embeddings,
                         const ParamSet& params) {
  if (embeddings.size() == 1) return embeddings.front();
  return matmul(attention_weights(embeddings, params), stack_rows(embeddings));
}

Tensor embed_node(const WalkSource& source, NodeId anchor, std::size_t level,
                  double t, const MemoryBank& bank, const ParamSet& params,
                  const WalkOptions& options, Rng& rng) {
  std::vector<Tensor> embeddings;
  for (const auto& walk : sample_walks(source, anchor, level, t, options, rng)) {
    if (!walk.empty()) embeddings.push_back(intra_walk_embed(walk, bank, params));
  }
  if (embeddings.empty()) return Tensor::zeros({bank.memory_dim()});
  return inter_walk_attend(embeddings, params);
}

}  // namespace hmod
