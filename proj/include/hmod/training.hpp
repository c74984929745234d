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

// Chronological training and evaluation of the hierarchical-memory OD model,
// plus the historical-average and lagged linear-regression baselines.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hmod/config.hpp"
#include "hmod/dims.hpp"
#include "hmod/memory_bank.hpp"
#include "hmod/nn.hpp"
#include "hmod/predictor.hpp"
#include "hmod/trip_store.hpp"
#include "hmod/walk_embedding.hpp"

namespace hmod {

struct TrainConfig {
  double delta_t = 1800.0;  // seconds; prediction horizon and batch window
  std::size_t levels = 4;   // D discrete memories
  std::size_t fusion_layers = 2;
  std::size_t memory_dim = 128;
  std::size_t message_dim = 128;
  std::size_t head_hidden = 256;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  std::size_t walk_length = 4;
  std::size_t walk_pairs = 2;
  double walk_smoothing = 0.01;
  double candidate_horizon = 0.0;  // 0: twice the longest discrete span
  std::uint64_t seed = 1;
  double train_fraction = 10.0 / 14.0;
  double val_fraction = 2.0 / 14.0;
  double test_fraction = 2.0 / 14.0;
  bool disable_continuous = false;
  bool disable_embedding = false;
  bool plain_mse = false;
  bool use_event_features = false;
  std::string ha_mode = "slot";  // slot | global
  std::vector<double> thresholds = kDefaultThresholds;

  double effective_horizon() const;
  void validate() const;
};

// Reads every known key, then rejects unknown ones.
TrainConfig parse_train_config(KeyValueFile& file);
TrainConfig load_train_config(const std::string& path);
// Every key with its resolved value, in a form parse_train_config accepts.
void write_train_config(std::ostream& out, const TrainConfig& config);

ModelDims model_dims(const TrainConfig& config, const EventLog& log);

// The event log cut into consecutive windows of delta_t anchored at the
// log's origin time, with each window's OD matrix precomputed.
class WindowedStream {
 public:
  WindowedStream(const EventLog& log, double delta_t);

  const EventLog& log() const { return *log_; }
  double delta_t() const { return delta_t_; }
  std::size_t window_count() const { return od_.size(); }
  double window_start(std::size_t k) const;
  double window_end(std::size_t k) const { return window_start(k + 1); }
  const ODMatrix& od(std::size_t k) const { return od_.at(k); }
  std::span<const TripEvent> events(std::size_t k) const;
  // Demand over the `span_windows` windows ending just before window
  // `end_window` (clipped at the stream start).
  ODMatrix span_od(std::size_t end_window, std::size_t span_windows) const;

 private:
  const EventLog* log_;
  double delta_t_;
  std::vector<ODMatrix> od_;
};

struct WindowSplit {
  std::size_t train_begin = 0, train_end = 0, val_end = 0, test_end = 0;
};
WindowSplit split_windows(std::size_t window_count, const TrainConfig& config);

// Parameters plus the wiring that turns a window of events into memory
// updates and an OD prediction.
class HmodModel {
 public:
  HmodModel(const TrainConfig& config, const ModelDims& dims);

  const TrainConfig& config() const { return config_; }
  const ModelDims& dims() const { return dims_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  MemoryBank make_bank(double t_start) const;

  // Level d >= 1 fires at the end of window k when (k + 1) is a multiple of
  // 2^(d-1).
  bool level_fires(std::size_t level, std::size_t window) const;

  // Computes messages for every node from the pre-window bank, then commits
  // GRU updates in node order. Returns H' per node: fresh memories are graph
  // tensors (when gradients are enabled), untouched ones are constants.
  // `salt` separates walk random streams between passes.
  std::vector<Tensor> process_window(const WindowedStream& stream,
                                     std::size_t window, MemoryBank& bank,
                                     std::uint64_t salt) const;

  // Prediction for the window following the bank's current position.
  Tensor predict(const std::vector<Tensor>& fused_rows) const;
  Tensor predict(const MemoryBank& bank) const;

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  TrainConfig config_;
  ModelDims dims_;
  ParamSet params_;
  WalkOptions walk_options_;
};

struct EpochResult {
  double mean_loss = 0.0;
  std::size_t steps = 0;
};

// One chronological pass over windows [begin, end): update memories, predict
// the next window, take one Adam step per window. Memories are detached at
// window boundaries.
EpochResult run_epoch(HmodModel& model, const WindowedStream& stream,
                      std::size_t begin, std::size_t end, MemoryBank& bank,
                      std::uint64_t salt);

// Predict-then-update over [begin, end) without gradients. The bank must be
// positioned at window_start(begin) and ends at window_start(end).
MetricReport evaluate(const HmodModel& model, const WindowedStream& stream,
                      std::size_t begin, std::size_t end, MemoryBank& bank,
                      MetricAccumulator* pooled = nullptr);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_rmse = 0.0;
};

struct FitResult {
  ParamSet::Values best_params;
  MemoryBank::Snapshot best_bank;  // positioned at the end of validation
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  MetricReport val_report;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Early-stopped training on the train split, selected on validation
// RMSE(>= 0). The model is left holding the best parameters.
FitResult fit(HmodModel& model, const WindowedStream& stream,
              const WindowSplit& split, const EpochCallback& on_epoch = {});

// --- baselines -----------------------------------------------------------

// Per time-of-day slot (or global) mean of the training windows.
MetricReport baseline_ha(const WindowedStream& stream, const WindowSplit& split,
                         const TrainConfig& config,
                         MetricAccumulator* pooled = nullptr);

struct LagRegression {
  std::vector<double> coefficients;  // lag 1 first
  double intercept = 0.0;
  bool ridge = false;                // damping fallback was needed
};

// Least squares of target on its lags (one row per sample, lag 1 first).
LagRegression fit_lag_regression(std::span<const std::vector<double>> lags,
                                 std::span<const double> targets);

inline constexpr std::size_t kRegressionLags = 4;

// One regression shared by all OD pairs, fit on the training windows.
MetricReport baseline_lr(const WindowedStream& stream, const WindowSplit& split,
                         const TrainConfig& config,
                         MetricAccumulator* pooled = nullptr,
                         LagRegression* fitted = nullptr);

}  // namespace hmod
