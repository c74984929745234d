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
#include <string>
#include <vector>

#include "hmod/dims.hpp"
#include "hmod/memory_bank.hpp"
#include "hmod/nn.hpp"
#include "hmod/tensor.hpp"

namespace hmod {

// Parameter names owned by the message path.
namespace message_params {
inline constexpr const char* kTimeWeight = "time.w_e";
inline constexpr const char* kTimeBias = "time.b_e";
inline constexpr const char* kPool = "fuse.pool";
inline constexpr const char* kMess = "fuse.mess";
inline constexpr const char* kGru = "gru";
// Two-layer compression of level d: "<msg.L<d>>.inner" then ".outer".
std::string compress_prefix(std::size_t level);
}  // namespace message_params

// Width of the raw message M' for a level.
std::size_t raw_message_width(const ModelDims& dims, std::size_t level);

void register_message_params(ParamSet& params, const ModelDims& dims);

// (1 + W_e * dt + b_e) (.) h with dt = delta_t_seconds / 3600.
Tensor time_encode(const Tensor& h, double delta_t_seconds,
                   const ParamSet& params);

// MEAN over the batch of [h0 || h0 * exp(-(t - t_b) / timescale)].
// `event_times` must be non-empty; every t_b <= t.
Tensor batch_aggregate_continuous(std::span<const double> h0,
                                  std::span<const double> event_times,
                                  double t, double timescale);

// Level-0 raw message [H'' || Theta || Omega (|| mean features)].
Tensor continuous_message_input(const Tensor& aggregated, const Tensor& encoded,
                                const Tensor& embedding,
                                const Tensor* features = nullptr);
// Level d >= 1 raw message [H^d || Y^i over the level span || Omega].
Tensor discrete_message_input(const Tensor& memory,
                              std::span<const double> od_row,
                              const Tensor& embedding);

// M^0_d = W_m1 relu(W_m2 M' + b_m2) + b_m1, with level-specific weights.
Tensor compress_message(std::size_t level, const Tensor& raw,
                        const ParamSet& params);

// max over rows of relu(W_pool m + b_pool); zeros(d_M) for an empty set.
Tensor aggregate_others(const std::vector<Tensor>& others,
                        std::size_t message_dim, const ParamSet& params);

// Runs `layers` rounds of
//   M^l_d = W_mess [M^{l-1}_d || AGG({M^{l-1}_k : k != d})] + b_mess
// over the given per-level messages (in level order). A level flagged in
// `frozen` keeps its input message at every layer; it still feeds the
// other levels' aggregation. With layers == 0 the input is returned as is.
std::vector<Tensor> fuse_messages(const std::vector<Tensor>& messages,
                                  std::size_t layers, const ParamSet& params,
                                  const std::vector<bool>& frozen = {});

// H^d <- GRU(H^d, M^L_d): writes the new memory and the fused message into
// the bank at time t and returns the new memory as a graph tensor.
Tensor commit_update(MemoryBank& bank, NodeId node, std::size_t level,
                     const Tensor& memory, const Tensor& fused, double t,
                     const ParamSet& params);

}  // namespace hmod
