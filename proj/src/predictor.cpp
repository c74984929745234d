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

#include "hmod/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "hmod/error.hpp"

namespace hmod {

namespace hp = head_params;

void register_head_params(ParamSet& params, const ModelDims& dims) {
  register_linear(params, hp::kHidden, dims.head_hidden,
                  dims.active_levels() * dims.memory_dim);
  register_linear(params, hp::kOutput, dims.nodes, dims.head_hidden);
}

Tensor fuse_memories(const std::vector<Tensor>& level_memories) {
  return concat(level_memories);
}

std::vector<double> fuse_memories(const MemoryBank& bank, NodeId node,
                                  std::size_t first_level) {
  std::vector<double> out;
  out.reserve((bank.level_count() - first_level) * bank.memory_dim());
  for (std::size_t d = first_level; d < bank.level_count(); ++d) {
    const auto h = bank.read(node, d);
    out.insert(out.end(), h.begin(), h.end());
  }
  return out;
}

Tensor predict_row(const Tensor& fused, const ParamSet& params) {
  return linear(params, hp::kOutput, relu(linear(params, hp::kHidden, fused)));
}

Tensor predict_matrix(const std::vector<Tensor>& fused_rows,
                      const ParamSet& params) {
  std::vector<Tensor> rows;
  rows.reserve(fused_rows.size());
  for (const auto& h : fused_rows) rows.push_back(predict_row(h, params));
  return stack_rows(rows);
}

Tensor predict_matrix(const MemoryBank& bank, const ParamSet& params,
                      std::size_t first_level) {
  std::vector<Tensor> fused;
  fused.reserve(bank.node_count());
  for (NodeId i = 0; i < bank.node_count(); ++i) {
    fused.push_back(Tensor::vector(fuse_memories(bank, i, first_level)));
  }
  return predict_matrix(fused, params);
}

Tensor od_loss(std::span<const double> target, const Tensor& prediction,
               bool masked) {
  if (target.size() != prediction.size() || prediction.size() == 0) {
    throw Error(ErrorKind::kShape,
                "od_loss: target has " + std::to_string(target.size()) +
                    " entries, prediction " +
                    shape_string(prediction.shape()));
  }
  std::vector<double> mask(target.size(), 1.0);
  if (masked) {
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = od_loss_mask(target[i], prediction[i]);
    }
  }
  Tensor y = Tensor::from(prediction.shape(), {target.begin(), target.end()});
  Tensor m = Tensor::from(prediction.shape(), std::move(mask));
  Tensor residual = sub(prediction, y);
  return mean(mul(m, mul(residual, residual)));
}

Tensor od_loss(const ODMatrix& target, const Tensor& prediction, bool masked) {
  if (prediction.rank() != 2 || prediction.dim(0) != target.nodes ||
      prediction.dim(1) != target.nodes) {
    throw Error(ErrorKind::kShape,
                "od_loss: target is " + std::to_string(target.nodes) + "x" +
                    std::to_string(target.nodes) + ", prediction " +
                    shape_string(prediction.shape()));
  }
  return od_loss(target.values, prediction, masked);
}

std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y) {
  const auto n = x.size();
  if (n < 2 || y.size() != n) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

const ThresholdMetrics& MetricReport::at(double threshold) const {
  for (const auto& e : entries) {
    if (e.threshold == threshold) return e;
  }
  throw Error(ErrorKind::kUsage,
              "no metrics for threshold " + std::to_string(threshold));
}

MetricReport metrics(std::span<const double> truth,
                     std::span<const double> prediction,
                     const std::vector<double>& thresholds, bool clamp) {
  if (truth.size() != prediction.size()) {
    throw Error(ErrorKind::kShape, "metrics: truth and prediction sizes differ");
  }
  MetricReport report;
  for (double p : thresholds) {
    std::vector<double> ys, yhats;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] >= p) {
        ys.push_back(truth[i]);
        yhats.push_back(clamp ? std::max(prediction[i], 0.0) : prediction[i]);
      }
    }
    ThresholdMetrics m;
    m.threshold = p;
    m.count = ys.size();
    double sq = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      sq += (ys[i] - yhats[i]) * (ys[i] - yhats[i]);
    }
    m.rmse = ys.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(ys.size()));
    m.pcc = pearson(ys, yhats);
    report.entries.push_back(m);
  }
  return report;
}

void MetricAccumulator::add(std::span<const double> truth,
                            std::span<const double> prediction) {
  if (truth.size() != prediction.size()) {
    throw Error(ErrorKind::kShape, "metric accumulator: size mismatch");
  }
  truth_.insert(truth_.end(), truth.begin(), truth.end());
  prediction_.insert(prediction_.end(), prediction.begin(), prediction.end());
}

MetricReport MetricAccumulator::report(const std::vector<double>& thresholds,
                                       bool clamp) const {
  return metrics(truth_, prediction_, thresholds, clamp);
}

}  // namespace hmod
