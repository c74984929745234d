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

// Shared helpers for the unit tests.
#pragma once

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hmod/nn.hpp"
#include "hmod/random.hpp"
#include "hmod/tensor.hpp"
#include "hmod/trip_store.hpp"

namespace hmod::testing {

// Largest relative error between analytic and central-difference gradients
// of `loss` with respect to every element of `inputs`.
inline double max_grad_error(std::vector<Tensor*> inputs,
                             const std::function<Tensor()>& loss,
                             double step = 1e-5) {
  for (auto* t : inputs) t->zero_grad();
  backward(loss());
  double worst = 0.0;
  for (auto* t : inputs) {
    const std::vector<double> analytic(t->grad().begin(), t->grad().end());
    t->zero_grad();
    auto values = t->mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      double up, down;
      {
        NoGradGuard g;
        values[i] = saved + step;
        up = loss().item();
        values[i] = saved - step;
        down = loss().item();
      }
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic.empty() ? 0.0 : analytic[i];
      const double err = std::fabs(a - numeric) /
                         std::max({std::fabs(a), std::fabs(numeric), 1e-4});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

inline double max_grad_error(ParamSet& params, const std::function<Tensor()>& loss,
                             double step = 1e-5) {
  std::vector<Tensor*> inputs;
  for (const auto& name : params.names()) inputs.push_back(&params.get(name));
  return max_grad_error(inputs, loss, step);
}

inline Tensor random_tensor(Shape shape, Rng& rng, bool requires_grad = true,
                            double scale = 1.0) {
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = scale * rng.normal();
  return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

// Random log with integer-valued times half the time so ties are common.
inline EventLog random_log(Rng& rng, std::size_t max_nodes = 10,
                           std::size_t max_events = 500, double span = 1000.0) {
  const std::size_t n = 1 + rng.next() % max_nodes;
  const std::size_t m = rng.next() % (max_events + 1);
  const bool integer_times = rng.uniform() < 0.5;
  std::vector<TripEvent> events;
  events.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    TripEvent e;
    e.origin = static_cast<NodeId>(rng.next() % n);
    e.destination = static_cast<NodeId>(rng.next() % n);
    e.timestamp = integer_times ? std::floor(rng.uniform() * 50.0) * (span / 50.0)
                                : rng.uniform() * span;
    events.push_back(e);
  }
  return EventLog(n, 0, std::move(events));
}

}  // namespace hmod::testing
