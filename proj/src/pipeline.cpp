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

#include "hmod/pipeline.hpp"

#include <fstream>

#include "hmod/archive.hpp"
#include "hmod/error.hpp"

namespace hmod {

const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> names = {
      "full", "wo_c", "wo_emb", "wo_odloss", "D1", "D2", "D3", "D4"};
  return names;
}

TrainConfig apply_variant(TrainConfig config, const std::string& variant) {
  if (variant == "full") {
  } else if (variant == "wo_c" || variant == "w/o c") {
    config.disable_continuous = true;
  } else if (variant == "wo_emb" || variant == "w/o emb") {
    config.disable_embedding = true;
  } else if (variant == "wo_odloss" || variant == "w/o ODLoss") {
    config.plain_mse = true;
  } else if (variant.size() == 2 && variant[0] == 'D' && variant[1] >= '1' &&
             variant[1] <= '9') {
    config.levels = static_cast<std::size_t>(variant[1] - '0');
    config.candidate_horizon = 0.0;
  } else {
    throw Error(ErrorKind::kUsage, "unknown variant '" + variant +
                                       "' (expected full, wo_c, wo_emb, "
                                       "wo_odloss or D1..D9)");
  }
  config.validate();
  return config;
}

MetricReport score_test(const HmodModel& model, const WindowedStream& stream,
                        const WindowSplit& split, MemoryBank& bank,
                        MetricAccumulator* pooled) {
  return evaluate(model, stream, split.val_end, split.test_end, bank, pooled);
}

ExperimentOutcome run_experiment(const EventLog& log, const TrainConfig& config,
                                 bool with_baselines,
                                 const EpochCallback& on_epoch) {
  const WindowedStream stream(log, config.delta_t);
  const auto split = split_windows(stream.window_count(), config);
  if (split.train_end < 2) {
    throw Error(ErrorKind::kData, "training split needs at least 2 windows, got " +
                                      std::to_string(split.train_end));
  }
  ExperimentOutcome out;
  out.model = std::make_unique<HmodModel>(config, model_dims(config, log));
  out.fit = fit(*out.model, stream, split, on_epoch);
  out.test_bank = out.model->make_bank(stream.window_start(split.val_end));
  out.test_bank.restore(out.fit.best_bank);
  MetricAccumulator pooled;
  out.hmod = score_test(*out.model, stream, split, out.test_bank, &pooled);
  out.test_predictions = pooled.predictions();
  out.results.push_back({"HMOD", out.hmod});
  if (with_baselines) {
    out.results.push_back({"HA", baseline_ha(stream, split, config)});
    out.results.push_back({"LR", baseline_lr(stream, split, config)});
  }
  return out;
}

std::map<std::string, std::string> write_run(const std::filesystem::path& dir,
                                             const ExperimentOutcome& outcome,
                                             const TrainConfig& config) {
  std::filesystem::create_directories(dir);
  outcome.model->save(dir / "model.ckpt");
  MemoryBank bank = outcome.model->make_bank(0.0);
  bank.restore(outcome.fit.best_bank);
  TensorArchive archive;
  bank.save_to(archive);
  archive.save(dir / "bank.ckpt");
  {
    std::ofstream cfg(dir / "config.cfg");
    if (!cfg) throw Error(ErrorKind::kIo, "cannot write " + (dir / "config.cfg").string());
    write_train_config(cfg, config);
  }
  write_history_csv(dir / "history.csv", outcome.fit.history);
  write_results_csv(dir / "results.csv", outcome.results);
  write_results_json(dir / "results.json", outcome.results);
  return {{"model", "model.ckpt"},     {"bank", "bank.ckpt"},
          {"config", "config.cfg"},    {"history", "history.csv"},
          {"results_csv", "results.csv"}, {"results_json", "results.json"}};
}

}  // namespace hmod
