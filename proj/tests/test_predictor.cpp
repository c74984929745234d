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

#include <gtest/gtest.h>

#include <cmath>

#include "hmod/error.hpp"
#include "test_util.hpp"

using namespace hmod;
using hmod::testing::max_grad_error;
using hmod::testing::random_tensor;

namespace {

TEST(OdLossTest, SignZeroGrid) {
  const double values[] = {-2.0, 0.0, 3.0};
  for (double y : values) {
    for (double y_hat : values) {
      auto pred = Tensor::from({1, 1}, {y_hat}, true);
      auto loss = od_loss(std::vector<double>{y}, pred);
      const bool masked_out = y == 0.0 && y_hat <= 0.0;
      const double expected = masked_out ? 0.0 : (y_hat - y) * (y_hat - y);
      EXPECT_EQ(loss.item(), expected) << "y=" << y << " y_hat=" << y_hat;
      backward(loss);
      const double grad = masked_out ? 0.0 : 2.0 * (y_hat - y);
      EXPECT_EQ(pred.grad()[0], grad) << "y=" << y << " y_hat=" << y_hat;
    }
  }
}

TEST(OdLossTest, BoundaryIsGradientContinuous) {
  for (double y_hat : {-1e-9, 0.0, 1e-9}) {
    auto pred = Tensor::from({1, 1}, {y_hat}, true);
    auto loss = od_loss(std::vector<double>{0.0}, pred);
    backward(loss);
    EXPECT_LE(loss.item(), 1e-18);
    EXPECT_LE(std::fabs(pred.grad()[0]), 2e-9);
  }
}

TEST(OdLossTest, NormalizesByAllEntries) {
  // Two of four entries masked; normalizer stays N^2 = 4.
  auto pred = Tensor::from({2, 2}, {-1.0, 2.0, 0.0, 1.0});
  const std::vector<double> y{0.0, 0.0, 0.0, 3.0};
  EXPECT_DOUBLE_EQ(od_loss(y, pred).item(), (4.0 + 4.0) / 4.0);
  EXPECT_DOUBLE_EQ(od_loss(y, pred, false).item(), (1.0 + 4.0 + 0.0 + 4.0) / 4.0);
  EXPECT_THROW(od_loss(std::vector<double>{1.0}, pred), Error);
}

TEST(OdLossTest, PropertiesOnRandomPairs) {
  Rng rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> y(9), p(9);
    for (auto& v : y) v = rng.uniform() < 0.5 ? 0.0 : std::floor(rng.uniform() * 5);
    for (auto& v : p) v = rng.uniform() < 0.3 ? (rng.uniform() < 0.5 ? 0.0 : y[&v - p.data()])
                                              : rng.normal() * 2;
    const auto pred = Tensor::from({3, 3}, p);
    const double masked = od_loss(y, pred).item();
    const double plain = od_loss(y, pred, false).item();
    EXPECT_GE(masked, 0.0);
    EXPECT_LE(masked, plain);
    bool all_ok = true;
    for (int i = 0; i < 9; ++i) all_ok = all_ok && (y[i] == p[i] || (y[i] == 0 && p[i] <= 0));
    EXPECT_EQ(masked == 0.0, all_ok);
  }
}

TEST(MetricsTest, HandExample) {
  const std::vector<double> y{0, 3, 5, 0};
  const std::vector<double> p{0, 3, 4, 0};
  const auto r = metrics(y, p);
  EXPECT_NEAR(r.at(3).rmse, std::sqrt(0.5), 1e-15);
  EXPECT_EQ(r.at(3).count, 2u);
  EXPECT_EQ(r.at(0).count, 4u);
  EXPECT_EQ(r.at(5).count, 1u);
  EXPECT_FALSE(r.at(5).pcc.has_value());
  EXPECT_THROW(r.at(7), Error);
}

TEST(MetricsTest, PerfectAndConstantCases) {
  const std::vector<double> y{1, 4, 6, 8, 0, 3};
  const auto perfect = metrics(y, y);
  for (const auto& m : perfect.entries) {
    EXPECT_EQ(m.rmse, 0.0);
    ASSERT_TRUE(m.pcc.has_value());
    EXPECT_NEAR(*m.pcc, 1.0, 1e-12);
  }
  const std::vector<double> flat(6, 2.0);
  EXPECT_FALSE(metrics(flat, y).at(0).pcc.has_value());
  EXPECT_FALSE(pearson(std::vector<double>{1.0}, std::vector<double>{2.0}).has_value());
}

TEST(MetricsTest, ClampsNegativePredictions) {
  const std::vector<double> y{0, 2};
  const std::vector<double> p{-3, 2};
  EXPECT_EQ(metrics(y, p).at(0).rmse, 0.0);
  EXPECT_NEAR(metrics(y, p, {0.0}, false).at(0).rmse, std::sqrt(4.5), 1e-15);
}

TEST(MetricsTest, PearsonInvariantToPositiveAffineMaps) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(20), y(20), z(20);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    const double a = std::exp(rng.normal()), b = rng.normal() * 10;
    for (int i = 0; i < 20; ++i) z[i] = a * y[i] + b;
    EXPECT_NEAR(*pearson(x, y), *pearson(x, z), 1e-9);
  }
}

TEST(MetricsTest, AccumulatorPoolsWindows) {
  MetricAccumulator acc;
  acc.add(std::vector<double>{1, 2}, std::vector<double>{1, 3});
  acc.add(std::vector<double>{5, 0}, std::vector<double>{4, 0});
  const auto pooled = acc.report();
  const auto direct = metrics(std::vector<double>{1, 2, 5, 0}, std::vector<double>{1, 3, 4, 0});
  EXPECT_EQ(pooled.at(0).rmse, direct.at(0).rmse);
  EXPECT_EQ(pooled.at(0).pcc, direct.at(0).pcc);
  EXPECT_EQ(acc.size(), 4u);
}

class HeadTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dims.nodes = 4;
    dims.discrete_levels = 2;
    dims.memory_dim = 8;
    dims.head_hidden = 6;
    register_head_params(params, dims);
    params.init_uniform(14);
    for (const auto& name : params.names()) {
      if (params.get(name).rank() == 1) {
        for (auto& v : params.get(name).mutable_data()) v = 0.1 * rng.normal();
      }
    }
  }
  ModelDims dims;
  ParamSet params;
  Rng rng{15};
};

TEST_F(HeadTest, FusedMemoryIsLevelConcatenation) {
  MemoryBank bank(4, 2, 8, 0.0);
  std::vector<double> a(8, 1.0), b(8, 2.0);
  bank.write(1, 0, a, 1.0);
  bank.write(1, 2, b, 1.0);
  const auto f = fuse_memories(bank, 1);
  ASSERT_EQ(f.size(), 24u);
  EXPECT_EQ(f[0], 1.0);
  EXPECT_EQ(f[8], 0.0);
  EXPECT_EQ(f[23], 2.0);
  EXPECT_EQ(fuse_memories(bank, 1, 1).size(), 16u);
  const auto pred = predict_matrix(bank, params);
  EXPECT_EQ(pred.shape(), Shape({4, 4}));
}

TEST_F(HeadTest, HeadAndLossGradient) {
  std::vector<Tensor> rows;
  for (int i = 0; i < 4; ++i) rows.push_back(random_tensor({24}, rng));
  std::vector<double> y(16);
  for (auto& v : y) v = rng.uniform() < 0.4 ? 0.0 : std::floor(rng.uniform() * 6);
  std::vector<Tensor*> inputs;
  for (auto& r : rows) inputs.push_back(&r);
  for (const auto& name : params.names()) inputs.push_back(&params.get(name));
  EXPECT_LT(max_grad_error(inputs, [&] { return od_loss(y, predict_matrix(rows, params)); }),
            1e-4);
}

}  // namespace
