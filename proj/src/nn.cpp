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

#include "hmod/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "hmod/error.hpp"

namespace hmod {

Tensor& ParamSet::add(const std::string& name, Shape shape) {
  if (params_.contains(name)) {
    throw Error(ErrorKind::kState, "parameter '" + name + "' already exists");
  }
  auto [it, _] = params_.emplace(name, Tensor::zeros(std::move(shape), true));
  return it->second;
}

void ParamSet::init_uniform(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& [name, tensor] : params_) {
    auto values = tensor.mutable_data();
    if (tensor.rank() == 2) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(tensor.dim(1)));
      for (auto& v : values) {
        // 53-bit uniform in [0,1); avoids the implementation-defined
        // std::uniform_real_distribution so checkpoints are portable.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = (2.0 * u - 1.0) * bound;
      }
    } else {
      std::fill(values.begin(), values.end(), 0.0);
    }
  }
  moments_.clear();
}

bool ParamSet::contains(const std::string& name) const {
  return params_.contains(name);
}

const Tensor& ParamSet::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw Error(ErrorKind::kState, "unknown parameter '" + name + "'");
  }
  return it->second;
}

Tensor& ParamSet::get(const std::string& name) {
  return const_cast<Tensor&>(std::as_const(*this).get(name));
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::size_t ParamSet::value_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : params_) n += t.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& [_, t] : params_) t.zero_grad();
}

void ParamSet::adam_step(const AdamOptions& options) {
  bool any = false;
  for (const auto& [_, t] : params_) any = any || t.has_grad();
  if (!any) {
    throw Error(ErrorKind::kState,
                "adam_step: no parameter holds a gradient; run backward first");
  }
  for (auto& [name, tensor] : params_) {
    if (!tensor.has_grad()) continue;
    auto& m = moments_[name];
    if (m.first.empty()) {
      m.first.assign(tensor.size(), 0.0);
      m.second.assign(tensor.size(), 0.0);
    }
    ++m.steps;
    const double t = static_cast<double>(m.steps);
    const double correction1 = 1.0 - std::pow(options.beta1, t);
    const double correction2 = 1.0 - std::pow(options.beta2, t);
    auto values = tensor.mutable_data();
    auto grad = tensor.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      m.first[i] = options.beta1 * m.first[i] + (1.0 - options.beta1) * grad[i];
      m.second[i] = options.beta2 * m.second[i] +
                    (1.0 - options.beta2) * grad[i] * grad[i];
      const double m_hat = m.first[i] / correction1;
      const double v_hat = m.second[i] / correction2;
      values[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.eps);
    }
    tensor.zero_grad();
  }
}

std::uint64_t ParamSet::step_count(const std::string& name) const {
  get(name);
  auto it = moments_.find(name);
  return it == moments_.end() ? 0 : it->second.steps;
}

ParamSet::Values ParamSet::values() const {
  Values out;
  for (const auto& [name, t] : params_) out.emplace(name, t.to_vector());
  return out;
}

void ParamSet::load_values(const Values& values) {
  for (auto& [name, tensor] : params_) {
    auto it = values.find(name);
    if (it == values.end()) {
      throw Error(ErrorKind::kState, "missing value for parameter '" + name + "'");
    }
    if (it->second.size() != tensor.size()) {
      throw Error(ErrorKind::kShape,
                  "parameter '" + name + "' expects " +
                      std::to_string(tensor.size()) + " values, got " +
                      std::to_string(it->second.size()));
    }
    std::copy(it->second.begin(), it->second.end(),
              tensor.mutable_data().begin());
  }
  if (values.size() != params_.size()) {
    throw Error(ErrorKind::kState, "value set names parameters not in this model");
  }
}

void register_linear(ParamSet& params, const std::string& prefix,
                     std::size_t out, std::size_t in, bool bias) {
  params.add(prefix + ".weight", {out, in});
  if (bias) params.add(prefix + ".bias", {out});
}

Tensor linear(const ParamSet& params, const std::string& prefix,
              const Tensor& x) {
  Tensor y = matmul(params.get(prefix + ".weight"), x);
  const auto bias = prefix + ".bias";
  return params.contains(bias) ? add(y, params.get(bias)) : y;
}

void register_gru(ParamSet& params, const std::string& prefix,
                  std::size_t hidden, std::size_t input) {
  params.add(prefix + ".w_ih", {3 * hidden, input});
  params.add(prefix + ".w_hh", {3 * hidden, hidden});
  params.add(prefix + ".b_ih", {3 * hidden});
  params.add(prefix + ".b_hh", {3 * hidden});
}

Tensor gru_cell(const Tensor& h, const Tensor& x, const ParamSet& params,
                const std::string& prefix) {
  const auto& w_ih = params.get(prefix + ".w_ih");
  const auto& w_hh = params.get(prefix + ".w_hh");
  const std::size_t hidden = w_hh.dim(1);
  if (h.rank() != 1 || h.size() != hidden || x.rank() != 1 ||
      x.size() != w_ih.dim(1)) {
    throw Error(ErrorKind::kShape,
                "gru_cell: h " + shape_string(h.shape()) + ", x " +
                    shape_string(x.shape()) + " vs hidden " +
                    std::to_string(hidden) + ", input " +
                    std::to_string(w_ih.dim(1)));
  }
  Tensor gi = add(matmul(w_ih, x), params.get(prefix + ".b_ih"));
  Tensor gh = add(matmul(w_hh, h), params.get(prefix + ".b_hh"));
  Tensor r = sigmoid(add(slice(gi, 0, hidden), slice(gh, 0, hidden)));
  Tensor z = sigmoid(add(slice(gi, hidden, hidden), slice(gh, hidden, hidden)));
  Tensor n = tanh(add(slice(gi, 2 * hidden, hidden),
                      mul(r, slice(gh, 2 * hidden, hidden))));
  // (1 - z) * h + z * n  ==  h + z * (n - h)
  return add(h, mul(z, sub(n, h)));
}

}  // namespace hmod
