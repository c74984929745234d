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

#include "hmod/message_engine.hpp"

#include <cmath>

#include "hmod/error.hpp"

namespace hmod {

namespace message_params {
std::string compress_prefix(std::size_t level) {
  return "msg.L" + std::to_string(level);
}
}  // namespace message_params

namespace mp = message_params;

std::size_t raw_message_width(const ModelDims& dims, std::size_t level) {
  if (level == 0) return 4 * dims.memory_dim + dims.feature_dim;
  return 2 * dims.memory_dim + dims.nodes;
}

void register_message_params(ParamSet& params, const ModelDims& dims) {
  params.add(mp::kTimeWeight, {dims.memory_dim});
  params.add(mp::kTimeBias, {dims.memory_dim});
  for (std::size_t d = dims.first_level(); d < dims.level_count(); ++d) {
    const auto prefix = mp::compress_prefix(d);
    register_linear(params, prefix + ".inner", dims.message_dim,
                    raw_message_width(dims, d));
    register_linear(params, prefix + ".outer", dims.message_dim,
                    dims.message_dim);
  }
  if (dims.fusion_layers > 0) {
    register_linear(params, mp::kPool, dims.message_dim, dims.message_dim);
    register_linear(params, mp::kMess, dims.message_dim, 2 * dims.message_dim);
  }
  register_gru(params, mp::kGru, dims.memory_dim, dims.message_dim);
}

Tensor time_encode(const Tensor& h, double delta_t_seconds,
                   const ParamSet& params) {
  if (delta_t_seconds < 0.0) {
    throw Error(ErrorKind::kUsage, "time_encode: negative time gap " +
                                       std::to_string(delta_t_seconds));
  }
  const double hours = delta_t_seconds / 3600.0;
  Tensor gain = add_scalar(
      add(scale(params.get(mp::kTimeWeight), hours), params.get(mp::kTimeBias)),
      1.0);
  return mul(gain, h);
}

Tensor batch_aggregate_continuous(std::span<const double> h0,
                                  std::span<const double> event_times,
                                  double t, double timescale) {
  if (event_times.empty()) {
    throw Error(ErrorKind::kUsage,
                "batch_aggregate_continuous: empty batch (skip the node)");
  }
  const std::size_t dim = h0.size();
  std::vector<double> out(2 * dim, 0.0);
  double decay_total = 0.0;
  for (double tb : event_times) decay_total += std::exp(-(t - tb) / timescale);
  const double n = static_cast<double>(event_times.size());
  // mean_b [h || h * decay_b] = [h || h * mean_b decay_b]
  for (std::size_t i = 0; i < dim; ++i) {
    out[i] = h0[i];
    out[dim + i] = h0[i] * (decay_total / n);
  }
  return Tensor::vector(out);
}

Tensor continuous_message_input(const Tensor& aggregated, const Tensor& encoded,
                                const Tensor& embedding,
                                const Tensor* features) {
  if (features) return concat({aggregated, encoded, embedding, *features});
  return concat({aggregated, encoded, embedding});
}

Tensor discrete_message_input(const Tensor& memory,
                              std::span<const double> od_row,
                              const Tensor& embedding) {
  return concat({memory, Tensor::vector(od_row), embedding});
}

Tensor compress_message(std::size_t level, const Tensor& raw,
                        const ParamSet& params) {
  const auto prefix = mp::compress_prefix(level);
  return linear(params, prefix + ".outer",
                relu(linear(params, prefix + ".inner", raw)));
}

Tensor aggregate_others(const std::vector<Tensor>& others,
                        std::size_t message_dim, const ParamSet& params) {
  if (others.empty()) return Tensor::zeros({message_dim});
  std::vector<Tensor> projected;
  projected.reserve(others.size());
  for (const auto& m : others) projected.push_back(relu(linear(params, mp::kPool, m)));
  return maxpool_rows(stack_rows(projected));
}

std::vector<Tensor> fuse_messages(const std::vector<Tensor>& messages,
                                  std::size_t layers, const ParamSet& params,
                                  const std::vector<bool>& frozen) {
  if (!frozen.empty() && frozen.size() != messages.size()) {
    throw Error(ErrorKind::kShape, "fuse_messages: frozen mask has " +
                                       std::to_string(frozen.size()) +
                                       " entries for " +
                                       std::to_string(messages.size()) +
                                       " messages");
  }
  std::vector<Tensor> current = messages;
  if (layers == 0 || current.empty()) return current;
  const std::size_t dim = current.front().size();
  for (std::size_t l = 0; l < layers; ++l) {
    std::vector<Tensor> next;
    next.reserve(current.size());
    for (std::size_t d = 0; d < current.size(); ++d) {
      if (!frozen.empty() && frozen[d]) {
        next.push_back(current[d]);
        continue;
      }
      std::vector<Tensor> others;
      others.reserve(current.size() - 1);
      for (std::size_t k = 0; k < current.size(); ++k) {
        if (k != d) others.push_back(current[k]);
      }
      Tensor agg = aggregate_others(others, dim, params);
      next.push_back(linear(params, mp::kMess, concat({current[d], agg})));
    }
    current = std::move(next);
  }
  return current;
}

Tensor commit_update(MemoryBank& bank, NodeId node, std::size_t level,
                     const Tensor& memory, const Tensor& fused, double t,
                     const ParamSet& params) {
  if (t < bank.last_update(node, level)) {
    throw Error(ErrorKind::kState,
                "commit_update: t=" + std::to_string(t) +
                    " precedes last update of node " + std::to_string(node) +
                    " level " + std::to_string(level));
  }
  Tensor updated = gru_cell(memory, fused, params, mp::kGru);
  bank.write(node, level, updated.data(), t);
  bank.store_message(node, level, fused.data());
  return updated;
}

}  // namespace hmod
