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

// End-to-end runs shared by the CLI and the acceptance suite.
#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hmod/report.hpp"
#include "hmod/training.hpp"

namespace hmod {

// Variant names: full, wo_c, wo_emb, wo_odloss, D1..D4.
const std::vector<std::string>& ablation_variants();
TrainConfig apply_variant(TrainConfig config, const std::string& variant);

struct ExperimentOutcome {
  std::unique_ptr<HmodModel> model;
  FitResult fit;
  MemoryBank test_bank;  // positioned after the last test window
  MetricReport hmod;
  std::vector<double> test_predictions;  // pooled, unclamped
  std::vector<MethodResult> results;     // HMOD first, then baselines if run
};

// Fits on the train split, selects on validation, then scores the test split
// starting from the best end-of-validation bank.
ExperimentOutcome run_experiment(const EventLog& log, const TrainConfig& config,
                                 bool with_baselines,
                                 const EpochCallback& on_epoch = {});

// Scores the test split with a trained model and its end-of-validation bank.
MetricReport score_test(const HmodModel& model, const WindowedStream& stream,
                        const WindowSplit& split, MemoryBank& bank,
                        MetricAccumulator* pooled = nullptr);

// Writes model.ckpt, bank.ckpt, config.cfg, history.csv, results.csv and
// results.json into `dir`; returns the artifact map for the manifest.
std::map<std::string, std::string> write_run(const std::filesystem::path& dir,
                                             const ExperimentOutcome& outcome,
                                             const TrainConfig& config);

}  // namespace hmod
