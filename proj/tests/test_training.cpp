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

#include "hmod/training.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "hmod/error.hpp"
#include "hmod/pipeline.hpp"
#include "test_util.hpp"

using namespace hmod;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.delta_t = 1800.0;
  c.levels = 2;
  c.fusion_layers = 1;
  c.memory_dim = 6;
  c.message_dim = 6;
  c.head_hidden = 8;
  c.learning_rate = 3e-3;
  c.max_epochs = 3;
  c.patience = 2;
  c.walk_length = 2;
  c.walk_pairs = 1;
  c.seed = 5;
  return c;
}

// `days` days of demand repeating daily, with `per_window(k, i, j)` trips
// per pair in window k spread evenly inside the window.
template <typename F>
EventLog periodic_log(std::size_t nodes, std::size_t days, F per_window) {
  std::vector<TripEvent> events;
  const std::size_t windows = days * 48;
  for (std::size_t k = 0; k < windows; ++k) {
    for (NodeId i = 0; i < nodes; ++i) {
      for (NodeId j = 0; j < nodes; ++j) {
        const int c = per_window(k % 48, i, j);
        for (int e = 0; e < c; ++e) {
          events.push_back({i, j, k * 1800.0 + (e + 0.5) * 1800.0 / c, {}});
        }
      }
    }
  }
  return EventLog(nodes, 0, std::move(events), 0.0, true, windows * 1800.0);
}

EventLog daily_pattern_log(std::size_t days = 3) {
  return periodic_log(3, days, [](std::size_t slot, NodeId i, NodeId j) {
    const bool peak = slot >= 16 && slot < 20;
    return static_cast<int>((i + 2 * j) % 3) + (peak && i != j ? 3 : 0);
  });
}

// ---------------------------------------------------------------------------

TEST(TrainConfigTest, DefaultsAreValid) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.effective_horizon(), 2 * 8 * 1800.0);
}

TEST(TrainConfigTest, UnknownKeyIsNamed) {
  std::istringstream in("levels = 2\nlearnin_rate = 0.1\n");
  auto f = KeyValueFile::parse(in, "run.cfg");
  try {
    parse_train_config(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    EXPECT_NE(std::string(e.what()).find("learnin_rate"), std::string::npos);
  }
}

TEST(TrainConfigTest, InvariantsAreEnforced) {
  auto c = small_config();
  c.patience = c.max_epochs + 1;
  EXPECT_THROW(c.validate(), Error);
  c = small_config();
  c.val_fraction = 0.5;
  EXPECT_THROW(c.validate(), Error);
  c = small_config();
  c.levels = 0;
  c.disable_continuous = true;
  EXPECT_THROW(c.validate(), Error);
  c = small_config();
  c.thresholds = {3.0, 5.0};
  EXPECT_THROW(c.validate(), Error);
}

TEST(TrainConfigTest, WrittenConfigParsesBack) {
  auto c = small_config();
  c.thresholds = {0, 2.5};
  c.plain_mse = true;
  c.ha_mode = "global";
  std::stringstream text;
  write_train_config(text, c);
  auto f = KeyValueFile::parse(text, "round");
  const auto back = parse_train_config(f);
  std::stringstream again;
  write_train_config(again, back);
  EXPECT_EQ(text.str(), again.str());
  EXPECT_EQ(back.thresholds, c.thresholds);
  EXPECT_TRUE(back.plain_mse);
}

TEST(WindowedStreamTest, GridCountsAndSpans) {
  const auto log = daily_pattern_log(1);
  const WindowedStream s(log, 1800.0);
  ASSERT_EQ(s.window_count(), 48u);
  for (std::size_t k : {0u, 17u, 47u}) {
    EXPECT_EQ(s.od(k).values, log.od_matrix(k * 1800.0, (k + 1) * 1800.0).values);
  }
  const auto span = s.span_od(20, 4);
  EXPECT_EQ(span.values, log.od_matrix(16 * 1800.0, 20 * 1800.0).values);
  const auto clipped = s.span_od(1, 8);
  EXPECT_EQ(clipped.values, s.od(0).values);

  // Without a declared end the grid stops at the window of the last event.
  EventLog open(2, 0, {{0, 1, 10.0, {}}, {1, 0, 3700.0, {}}});
  EXPECT_EQ(WindowedStream(open, 1800.0).window_count(), 3u);
}

TEST(WindowedStreamTest, ChronologicalSplit) {
  TrainConfig c;
  const auto s = split_windows(14 * 48, c);
  EXPECT_EQ(s.train_begin, 0u);
  EXPECT_EQ(s.train_end, 480u);
  EXPECT_EQ(s.val_end, 576u);
  EXPECT_EQ(s.test_end, 672u);
}

TEST(HmodModelTest, LevelFiringSchedule) {
  auto c = small_config();
  c.levels = 3;
  HmodModel m(c, model_dims(c, daily_pattern_log(1)));
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_TRUE(m.level_fires(1, k));
    EXPECT_EQ(m.level_fires(2, k), k % 2 == 1);
    EXPECT_EQ(m.level_fires(3, k), k % 4 == 3);
  }
}

TEST(HmodModelTest, ProcessWindowTouchesOnlyFiringLevels) {
  const auto c = small_config();
  EventLog log(3, 0, {{0, 1, 100.0, {}}, {2, 1, 2000.0, {}}}, 0.0, true, 4 * 1800.0);
  const WindowedStream s(log, c.delta_t);
  HmodModel m(c, model_dims(c, log));
  auto bank = m.make_bank(0.0);
  NoGradGuard g;
  const auto rows = m.process_window(s, 0, bank, 1);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].size(), 3 * c.memory_dim);
  EXPECT_EQ(bank.last_update(0, 0), 1800.0);  // departed in window 0
  EXPECT_EQ(bank.last_update(1, 0), 0.0);     // only arrivals
  EXPECT_EQ(bank.last_update(2, 0), 0.0);     // departs in window 1
  for (NodeId i = 0; i < 3; ++i) {
    EXPECT_EQ(bank.last_update(i, 1), 1800.0);
    EXPECT_EQ(bank.last_update(i, 2), 0.0);  // fires after window 1
  }
  m.process_window(s, 1, bank, 1);
  EXPECT_EQ(bank.last_update(2, 0), 3600.0);
  EXPECT_EQ(bank.last_update(1, 2), 3600.0);
}

TEST(HmodModelTest, ProcessWindowIsRepeatable) {
  const auto c = small_config();
  const auto log = daily_pattern_log(1);
  const WindowedStream s(log, c.delta_t);
  HmodModel m(c, model_dims(c, log));
  NoGradGuard g;
  auto bank = m.make_bank(0.0);
  for (std::size_t k = 0; k < 5; ++k) m.process_window(s, k, bank, 3);
  auto a = bank;
  auto b = bank;
  m.process_window(s, 5, a, 3);
  m.process_window(s, 5, b, 3);
  EXPECT_EQ(a.snapshot(), b.snapshot());
  EXPECT_TRUE(a.all_finite());
}

TEST(HmodModelTest, SentinelAfterPredictionWindowChangesNothing) {
  const auto c = small_config();
  const auto base = daily_pattern_log(1);
  const std::size_t k = 20;  // predict window k+1 after processing window k
  for (double offset : {0.0, 900.0, 1800.0, 20000.0}) {
    std::vector<TripEvent> events(base.events().begin(), base.events().end());
    events.push_back({0, 2, (k + 1) * 1800.0 + offset, {}});
    const EventLog with(base.node_count(), 0, events, 0.0, true, base.end_time());
    HmodModel m(c, model_dims(c, base));
    auto run = [&](const EventLog& log) {
      const WindowedStream s(log, c.delta_t);
      auto bank = m.make_bank(0.0);
      NoGradGuard g;
      for (std::size_t w = 0; w <= k; ++w) m.process_window(s, w, bank, 0);
      return m.predict(bank).to_vector();
    };
    EXPECT_EQ(run(base), run(with)) << "sentinel offset " << offset;
  }
}

TEST(TrainingTest, EmptySliceLeavesParamsAlone) {
  const auto c = small_config();
  const auto log = daily_pattern_log(1);
  const WindowedStream s(log, c.delta_t);
  HmodModel m(c, model_dims(c, log));
  const auto before = m.params().values();
  auto bank = m.make_bank(0.0);
  const auto r = run_epoch(m, s, 3, 3, bank, 1);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(m.params().values(), before);
}

TEST(TrainingTest, RunEpochIsDeterministic) {
  const auto c = small_config();
  const auto log = daily_pattern_log(1);
  const WindowedStream s(log, c.delta_t);
  auto once = [&] {
    HmodModel m(c, model_dims(c, log));
    auto bank = m.make_bank(0.0);
    const auto r = run_epoch(m, s, 0, 30, bank, 1);
    return std::make_pair(r.mean_loss, m.params().values());
  };
  const auto a = once();
  const auto b = once();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(TrainingTest, NonFiniteLossAborts) {
  const auto c = small_config();
  const auto log = daily_pattern_log(1);
  const WindowedStream s(log, c.delta_t);
  HmodModel m(c, model_dims(c, log));
  m.params().get("head.output.bias").mutable_data()[0] =
      std::numeric_limits<double>::quiet_NaN();
  auto bank = m.make_bank(0.0);
  try {
    run_epoch(m, s, 0, 10, bank, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
  }
}

TEST(TrainingTest, LossDecreasesOnPeriodicStream) {
  auto c = small_config();
  c.max_epochs = 20;
  c.patience = 20;
  c.train_fraction = 1.0;
  c.val_fraction = 0.0;
  c.test_fraction = 0.0;
  const auto log = daily_pattern_log(2);
  const WindowedStream s(log, c.delta_t);
  HmodModel m(c, model_dims(c, log));
  const auto fitted = fit(m, s, split_windows(s.window_count(), c));
  ASSERT_EQ(fitted.history.size(), 20u);
  EXPECT_LT(fitted.history.back().train_loss, 0.5 * fitted.history.front().train_loss);
}

TEST(TrainingTest, EarlyStoppingRules) {
  auto c = small_config();
  c.max_epochs = 1;
  c.patience = 0;
  const auto log = daily_pattern_log(2);
  const WindowedStream s(log, c.delta_t);
  const auto split = split_windows(s.window_count(), c);
  {
    HmodModel m(c, model_dims(c, log));
    EXPECT_EQ(fit(m, s, split).history.size(), 1u);
  }
  c.max_epochs = 15;
  c.learning_rate = 0.05;  // large enough to overshoot quickly
  HmodModel m(c, model_dims(c, log));
  const auto r = fit(m, s, split);
  ASSERT_GE(r.history.size(), 1u);
  EXPECT_LE(r.history.size(), c.max_epochs);
  double best = r.history.front().val_rmse;
  for (std::size_t e = 1; e < r.history.size(); ++e) {
    const bool improved = r.history[e].val_rmse < best;
    if (e + 1 < r.history.size()) {
      EXPECT_TRUE(improved) << "epoch " << e;
    }
    best = std::min(best, r.history[e].val_rmse);
  }
  if (r.history.size() < c.max_epochs) {
    EXPECT_GE(r.history.back().val_rmse, best);
  }
  // The best checkpoint is restored.
  EXPECT_EQ(m.params().values(), r.best_params);
}

TEST(BaselineTest, HistoricalAverageIsExactOnConstantDemand) {
  const auto c = small_config();
  const auto log = periodic_log(3, 14, [](std::size_t, NodeId i, NodeId j) {
    return static_cast<int>(i + j);
  });
  const WindowedStream s(log, c.delta_t);
  const auto split = split_windows(s.window_count(), c);
  EXPECT_EQ(baseline_ha(s, split, c).at(0).rmse, 0.0);
  auto global = c;
  global.ha_mode = "global";
  EXPECT_EQ(baseline_ha(s, split, global).at(0).rmse, 0.0);
}

TEST(BaselineTest, HistoricalAverageUsesTimeOfDaySlots) {
  const auto c = small_config();
  const auto log = daily_pattern_log(14);
  const WindowedStream s(log, c.delta_t);
  const auto split = split_windows(s.window_count(), c);
  EXPECT_EQ(baseline_ha(s, split, c).at(0).rmse, 0.0);
  auto global = c;
  global.ha_mode = "global";
  EXPECT_GT(baseline_ha(s, split, global).at(0).rmse, 0.1);
}

TEST(BaselineTest, LagRegressionRecoversLagOne) {
  Rng rng(3);
  std::vector<std::vector<double>> lags;
  std::vector<double> y;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> row(4);
    for (auto& v : row) v = rng.normal();
    lags.push_back(row);
    y.push_back(row[0]);
  }
  const auto fit = fit_lag_regression(lags, y);
  EXPECT_FALSE(fit.ridge);
  EXPECT_NEAR(fit.coefficients[0], 1.0, 1e-10);
  for (int l = 1; l < 4; ++l) EXPECT_NEAR(fit.coefficients[l], 0.0, 1e-10);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-10);
}

TEST(BaselineTest, LagRegressionFallsBackToRidge) {
  const auto c = small_config();
  const auto log = periodic_log(2, 14, [](std::size_t, NodeId, NodeId) { return 2; });
  const WindowedStream s(log, c.delta_t);
  LagRegression fitted;
  const auto r = baseline_lr(s, split_windows(s.window_count(), c), c, nullptr, &fitted);
  EXPECT_TRUE(fitted.ridge);
  EXPECT_LT(r.at(0).rmse, 1e-3);
}

TEST(CheckpointTest, SaveLoadReproducesPredictions) {
  const auto c = small_config();
  const auto log = daily_pattern_log(1);
  HmodModel a(c, model_dims(c, log));
  auto bank = a.make_bank(0.0);
  Rng rng(4);
  for (NodeId i = 0; i < 3; ++i) {
    for (std::size_t d = 0; d < bank.level_count(); ++d) {
      std::vector<double> h(c.memory_dim);
      for (auto& v : h) v = rng.normal();
      bank.write(i, d, h, 0.0);
    }
  }
  const auto path = std::filesystem::temp_directory_path() / "hmod_ckpt_test.bin";
  a.save(path);
  auto other = c;
  other.seed = 99;
  HmodModel b(other, model_dims(other, log));
  EXPECT_NE(a.predict(bank).to_vector(), b.predict(bank).to_vector());
  b.load(path);
  EXPECT_EQ(a.predict(bank).to_vector(), b.predict(bank).to_vector());

  auto wide = c;
  wide.memory_dim = 7;
  HmodModel w(wide, model_dims(wide, log));
  EXPECT_THROW(w.load(path), Error);
}

TEST(VariantTest, FlagsAndLevels) {
  const TrainConfig c;
  EXPECT_TRUE(apply_variant(c, "wo_c").disable_continuous);
  EXPECT_TRUE(apply_variant(c, "wo_emb").disable_embedding);
  EXPECT_TRUE(apply_variant(c, "wo_odloss").plain_mse);
  EXPECT_EQ(apply_variant(c, "D2").levels, 2u);
  EXPECT_EQ(ablation_variants().size(), 8u);
  EXPECT_THROW(apply_variant(c, "D0"), Error);
  EXPECT_THROW(apply_variant(c, "everything"), Error);
}

TEST(VariantTest, WithoutEmbeddingHasNoWalkParams) {
  auto c = small_config();
  c.disable_embedding = true;
  const auto log = daily_pattern_log(1);
  HmodModel m(c, model_dims(c, log));
  EXPECT_FALSE(m.params().contains("walk.attention"));
  const WindowedStream s(log, c.delta_t);
  auto bank = m.make_bank(0.0);
  EXPECT_GT(run_epoch(m, s, 0, 6, bank, 1).steps, 0u);
}

}  // namespace
