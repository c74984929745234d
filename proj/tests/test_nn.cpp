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

#include <gtest/gtest.h>

#include <cmath>

#include "hmod/error.hpp"
#include "test_util.hpp"

using namespace hmod;
using hmod::testing::max_grad_error;
using hmod::testing::random_tensor;

namespace {

// Textbook Adam on one scalar, written independently of ParamSet.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double p, double g, const AdamOptions& o) {
    ++t;
    m = o.beta1 * m + (1 - o.beta1) * g;
    v = o.beta2 * v + (1 - o.beta2) * g * g;
    const double mh = m / (1 - std::pow(o.beta1, t));
    const double vh = v / (1 - std::pow(o.beta2, t));
    return p - o.learning_rate * mh / (std::sqrt(vh) + o.eps);
  }
};

TEST(ParamSetTest, DuplicateNamesThrow) {
  ParamSet p;
  p.add("w", {2});
  EXPECT_THROW(p.add("w", {3}), Error);
  EXPECT_TRUE(p.contains("w"));
  EXPECT_THROW(p.get("missing"), Error);
}

TEST(ParamSetTest, InitUniformBoundsAndDeterminism) {
  ParamSet a, b;
  for (auto* p : {&a, &b}) {
    p->add("m", {16, 9});
    p->add("v", {16});
    p->init_uniform(99);
  }
  EXPECT_EQ(a.values(), b.values());
  const double bound = 1.0 / 3.0;
  double lo = 1.0, hi = -1.0;
  for (double x : a.get("m").data()) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  EXPECT_GE(lo, -bound);
  EXPECT_LE(hi, bound);
  EXPECT_LT(lo, -0.2);
  EXPECT_GT(hi, 0.2);
  for (double x : a.get("v").data()) EXPECT_EQ(x, 0.0);
  ParamSet c;
  c.add("m", {16, 9});
  c.add("v", {16});
  c.init_uniform(100);
  EXPECT_NE(a.values(), c.values());
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  ParamSet p;
  p.add("w", {2});
  p.get("w").mutable_data()[0] = 1.0;
  p.get("w").mutable_data()[1] = 1.0;
  const Tensor coeff = Tensor::vector({3.0, -0.5});
  backward(dot(p.get("w"), coeff));
  AdamOptions o;
  o.learning_rate = 0.01;
  p.adam_step(o);
  EXPECT_NEAR(p.get("w")[0], 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(p.get("w")[1], 1.0 + 0.01, 1e-9);
  EXPECT_FALSE(p.get("w").has_grad());
}

TEST(AdamTest, MatchesScalarOracleOverManySteps) {
  ParamSet p;
  p.add("w", {3});
  Rng rng(5);
  std::vector<ScalarAdam> oracle(3);
  std::vector<double> expected(3, 0.0);
  AdamOptions o{0.05, 0.9, 0.999, 1e-8};
  for (int step = 0; step < 40; ++step) {
    const auto target = random_tensor({3}, rng, false);
    auto diff = sub(p.get("w"), target);
    backward(sum(mul(diff, diff)));
    for (int i = 0; i < 3; ++i) {
      const double g = 2.0 * (expected[i] - target[i]);
      expected[i] = oracle[i].step(expected[i], g, o);
    }
    p.adam_step(o);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(p.get("w")[i], expected[i], 1e-12);
  }
  EXPECT_EQ(p.step_count("w"), 40u);
}

TEST(AdamTest, ZeroGradientLeavesValueAndAdvancesStep) {
  ParamSet p;
  p.add("w", {2});
  p.get("w").mutable_data()[0] = 0.7;
  backward(scale(sum(p.get("w")), 0.0));
  p.adam_step({});
  EXPECT_EQ(p.get("w")[0], 0.7);
  EXPECT_EQ(p.step_count("w"), 1u);
}

TEST(AdamTest, UnreachedParamsAreSkippedAndNoGradThrows) {
  ParamSet p;
  p.add("a", {1});
  p.add("b", {1});
  EXPECT_THROW(p.adam_step({}), Error);
  backward(sum(p.get("a")));
  p.adam_step({});
  EXPECT_EQ(p.step_count("a"), 1u);
  EXPECT_EQ(p.step_count("b"), 0u);
}

TEST(AdamTest, IdenticalRunsAreBitwiseEqual) {
  auto run = [] {
    ParamSet p;
    p.add("w", {4, 3});
    p.init_uniform(8);
    Rng rng(1);
    for (int s = 0; s < 10; ++s) {
      auto x = random_tensor({3}, rng, false);
      backward(sum(tanh(matmul(p.get("w"), x))));
      p.adam_step({});
    }
    return p.values();
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamTest, LoadValuesChecksShapes) {
  ParamSet p;
  p.add("w", {2});
  EXPECT_THROW(p.load_values({{"w", {1.0}}}), Error);
  p.load_values({{"w", {1.0, 2.0}}});
  EXPECT_EQ(p.get("w")[1], 2.0);
}

TEST(LinearTest, ComputesAffineMap) {
  ParamSet p;
  register_linear(p, "fc", 2, 3);
  auto w = p.get("fc.weight").mutable_data();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(i);
  p.get("fc.bias").mutable_data()[1] = 10.0;
  auto y = linear(p, "fc", Tensor::vector({1.0, 1.0, 1.0}));
  EXPECT_DOUBLE_EQ(y[0], 3.0);
  EXPECT_DOUBLE_EQ(y[1], 22.0);
}

class GruTest : public ::testing::Test {
 protected:
  static constexpr std::size_t kH = 4, kX = 3;
  void SetUp() override {
    register_gru(params, "g", kH, kX);
    params.init_uniform(17);
  }
  // Sets the update-gate biases (rows H..2H of b_ih).
  void set_update_bias(double value) {
    auto b = params.get("g.b_ih").mutable_data();
    for (std::size_t i = kH; i < 2 * kH; ++i) b[i] = value;
  }
  ParamSet params;
  Rng rng{23};
};

TEST_F(GruTest, UpdateGateSaturatedAtZeroKeepsState) {
  set_update_bias(-50.0);
  auto h = random_tensor({kH}, rng, false);
  auto x = random_tensor({kX}, rng, false);
  auto out = gru_cell(h, x, params, "g");
  for (std::size_t i = 0; i < kH; ++i) EXPECT_NEAR(out[i], h[i], 1e-12);
}

TEST_F(GruTest, UpdateGateSaturatedAtOneGivesCandidate) {
  set_update_bias(50.0);
  auto h = random_tensor({kH}, rng, false);
  auto x = random_tensor({kX}, rng, false);
  auto out = gru_cell(h, x, params, "g");
  // Candidate n = tanh(W_in x + b_in + r * (W_hn h + b_hn)), computed by hand.
  const auto& wih = params.get("g.w_ih");
  const auto& whh = params.get("g.w_hh");
  const auto& bih = params.get("g.b_ih");
  const auto& bhh = params.get("g.b_hh");
  for (std::size_t i = 0; i < kH; ++i) {
    auto row_dot = [](const Tensor& w, std::size_t row, const Tensor& v) {
      double s = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) s += w.at(row, k) * v[k];
      return s;
    };
    const double r = 1.0 / (1.0 + std::exp(-(row_dot(wih, i, x) + bih[i] +
                                             row_dot(whh, i, h) + bhh[i])));
    const std::size_t n_row = 2 * kH + i;
    const double n = std::tanh(row_dot(wih, n_row, x) + bih[n_row] +
                               r * (row_dot(whh, n_row, h) + bhh[n_row]));
    EXPECT_NEAR(out[i], n, 1e-12);
  }
}

TEST_F(GruTest, GradientMatchesFiniteDifferences) {
  auto h = random_tensor({kH}, rng);
  auto x = random_tensor({kX}, rng);
  std::vector<Tensor*> inputs{&h, &x};
  for (const auto& name : params.names()) inputs.push_back(&params.get(name));
  EXPECT_LT(max_grad_error(inputs, [&] { return sum(gru_cell(h, x, params, "g")); }),
            1e-4);
}

TEST(LinearGradTest, MatchesFiniteDifferences) {
  ParamSet p;
  register_linear(p, "a", 5, 4);
  register_linear(p, "b", 3, 5);
  p.init_uniform(3);
  Rng rng(4);
  auto x = random_tensor({4}, rng, false);
  EXPECT_LT(max_grad_error(p, [&] { return sum(linear(p, "b", relu(linear(p, "a", x)))); }),
            1e-4);
}

}  // namespace
