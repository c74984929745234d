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
#include <span>
#include <string>
#include <vector>

#include "hmod/dims.hpp"
#include "hmod/memory_bank.hpp"
#include "hmod/nn.hpp"
#include "hmod/tensor.hpp"
#include "hmod/trip_store.hpp"

namespace hmod {

namespace head_params {
inline constexpr const char* kHidden = "head.hidden";  // W_o2, b_o2
inline constexpr const char* kOutput = "head.output";  // W_o1, b_o1
}  // namespace head_params

void register_head_params(ParamSet& params, const ModelDims& dims);

// H' = H^first || ... || H^D, in level order.
Tensor fuse_memories(const std::vector<Tensor>& level_memories);
std::vector<double> fuse_memories(const MemoryBank& bank, NodeId node,
                                  std::size_t first_level = 0);

// Y^i = W_o1 relu(W_o2 H' + b_o2) + b_o1
Tensor predict_row(const Tensor& fused, const ParamSet& params);
// Rows i = 0..N-1 stacked into [N, N].
Tensor predict_matrix(const std::vector<Tensor>& fused_rows,
                      const ParamSet& params);
Tensor predict_matrix(const MemoryBank& bank, const ParamSet& params,
                      std::size_t first_level = 0);

// 0 when y == 0 and y_hat <= 0, else 1.
inline double od_loss_mask(double y, double y_hat) {
  return (y == 0.0 && y_hat <= 0.0) ? 0.0 : 1.0;
}

// (1 / |Y|) sum mask(y, y_hat) (y - y_hat)^2 with |Y| the entry count.
// masked == false gives plain MSE.
Tensor od_loss(const ODMatrix& target, const Tensor& prediction,
               bool masked = true);
Tensor od_loss(std::span<const double> target, const Tensor& prediction,
               bool masked = true);

std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y);

struct ThresholdMetrics {
  double threshold = 0.0;
  std::size_t count = 0;
  double rmse = 0.0;
  std::optional<double> pcc;  // nullopt: fewer than 2 entries or no variance
};

struct MetricReport {
  std::vector<ThresholdMetrics> entries;
  const ThresholdMetrics& at(double threshold) const;
};

inline const std::vector<double> kDefaultThresholds = {0.0, 3.0, 5.0};

// For each p, RMSE and PCC over entries with y >= p. Predictions are clamped
// at zero first unless `clamp` is false.
MetricReport metrics(std::span<const double> truth,
                     std::span<const double> prediction,
                     const std::vector<double>& thresholds = kDefaultThresholds,
                     bool clamp = true);

// Pools entries across prediction windows before computing metrics.
class MetricAccumulator {
 public:
  void add(std::span<const double> truth, std::span<const double> prediction);
  std::size_t size() const { return truth_.size(); }
  MetricReport report(const std::vector<double>& thresholds = kDefaultThresholds,
                      bool clamp = true) const;
  const std::vector<double>& predictions() const { return prediction_; }

 private:
  std::vector<double> truth_;
  std::vector<double> prediction_;
};

}  // namespace hmod
