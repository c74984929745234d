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
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hmod/tensor.hpp"

namespace hmod {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named trainable tensors plus their Adam moments. Iteration order is the
// lexicographic name order, which fixes initialization and update order.
class ParamSet {
 public:
  // Registers a zero-initialized parameter. Duplicate names throw.
  Tensor& add(const std::string& name, Shape shape);

  // Weight matrices ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); vectors are zeroed.
  void init_uniform(std::uint64_t seed);

  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);
  std::vector<std::string> names() const;
  std::size_t size() const { return params_.size(); }
  std::size_t value_count() const;

  void zero_grad();

  // One Adam update with bias correction over every parameter that holds a
  // gradient, then clears those gradients. Parameters the last backward did
  // not reach are left alone. Throws when no parameter holds a gradient.
  void adam_step(const AdamOptions& options);
  std::uint64_t step_count(const std::string& name) const;

  using Values = std::map<std::string, std::vector<double>>;
  Values values() const;
  // Shapes must match the registered parameters exactly.
  void load_values(const Values& values);

 private:
  struct Moments {
    std::vector<double> first;
    std::vector<double> second;
    std::uint64_t steps = 0;
  };

  std::map<std::string, Tensor> params_;
  std::map<std::string, Moments> moments_;
};

// y = W x + b with W = `<prefix>.weight` [out,in], b = `<prefix>.bias` [out].
void register_linear(ParamSet& params, const std::string& prefix,
                     std::size_t out, std::size_t in, bool bias = true);
Tensor linear(const ParamSet& params, const std::string& prefix,
              const Tensor& x);

// Gated recurrent unit, fully gated form:
//   r  = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//   z  = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//   n  = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//   h' = (1 - z) * h + z * n
// The three gates are packed row-wise (r, z, n) into `<prefix>.w_ih`
// [3H, X], `<prefix>.w_hh` [3H, H], `<prefix>.b_ih` and `<prefix>.b_hh`.
void register_gru(ParamSet& params, const std::string& prefix,
                  std::size_t hidden, std::size_t input);
Tensor gru_cell(const Tensor& h, const Tensor& x, const ParamSet& params,
                const std::string& prefix);

}  // namespace hmod
