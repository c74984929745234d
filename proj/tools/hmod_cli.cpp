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

// hmod command-line driver: generate, train, evaluate, ablate, walkdump.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hmod/archive.hpp"
#include "hmod/error.hpp"
#include "hmod/pipeline.hpp"
#include "hmod/random.hpp"
#include "hmod/report.hpp"
#include "hmod/walk_embedding.hpp"

namespace fs = std::filesystem;
using namespace hmod;

namespace {

struct Options {
  std::string config;
  std::string data;
  std::string out;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> variants;
  std::size_t threads = 1;
  bool quiet = false;
  // walkdump
  std::uint32_t anchor = 0;
  std::optional<double> time;
  std::size_t level = 0;
};

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw Error(ErrorKind::kUsage, std::string(flag) + " is required");
  if (!fs::exists(path)) throw Error(ErrorKind::kIo, std::string(flag) + ": no such file '" + path + "'");
}

TrainConfig resolve_config(const Options& o) {
  TrainConfig config;
  if (!o.config.empty()) {
    require_file(o.config, "--config");
    config = load_train_config(o.config);
  }
  if (o.seed) config.seed = *o.seed;
  config.validate();
  return config;
}

EpochCallback progress(bool quiet, const std::string& tag) {
  if (quiet) return {};
  return [tag](const EpochRecord& r) {
    std::fprintf(stderr, "%sepoch %zu  train_loss %.6g  val_rmse %.6g\n",
                 tag.c_str(), r.epoch, r.train_loss, r.val_rmse);
  };
}

void print_results(const std::vector<MethodResult>& results) {
  for (const auto& r : results) {
    std::printf("%-10s", r.method.c_str());
    for (const auto& m : r.report.entries) {
      std::printf("  >=%g rmse %.4f pcc %s", m.threshold, m.rmse,
                  m.pcc ? std::to_string(*m.pcc).c_str() : "n/a");
    }
    std::printf("\n");
  }
}

int cmd_generate(const Options& o) {
  require_file(o.config, "--config");
  if (o.out.empty()) throw Error(ErrorKind::kUsage, "--out is required");
  auto spec = load_synthetic_spec(o.config);
  const std::uint64_t seed = o.seed.value_or(spec.seed);
  const auto log = generate_synthetic(spec, seed);
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_trip_file(out, log);
  RunManifest m;
  m.command = "generate";
  m.dataset = o.config;
  m.dataset_hash = dataset_fingerprint(log);
  m.seed = seed;
  m.threads = o.threads;
  m.artifacts = {{"trips", out.filename().string()}};
  write_manifest(fs::path(o.out + ".manifest.json"), m);
  std::printf("wrote %zu trips over %zu nodes to %s\n", log.size(), log.node_count(),
              o.out.c_str());
  return 0;
}

int cmd_train(const Options& o) {
  require_file(o.data, "--data");
  if (o.out.empty()) throw Error(ErrorKind::kUsage, "--out is required");
  const auto config = resolve_config(o);
  const auto log = read_trip_file(o.data);
  auto outcome = run_experiment(log, config, true, progress(o.quiet, ""));
  const fs::path dir(o.out);
  RunManifest m;
  m.command = "train";
  m.config = config;
  m.dataset = o.data;
  m.dataset_hash = dataset_fingerprint(log);
  m.seed = config.seed;
  m.threads = o.threads;
  m.artifacts = write_run(dir, outcome, config);
  write_manifest(dir / "manifest.json", m);
  std::printf("best epoch %zu of %zu\n", outcome.fit.best_epoch, outcome.fit.history.size());
  print_results(outcome.results);
  return 0;
}

int cmd_evaluate(const Options& o) {
  require_file(o.data, "--data");
  if (o.checkpoint.empty()) throw Error(ErrorKind::kUsage, "--checkpoint is required");
  if (o.out.empty()) throw Error(ErrorKind::kUsage, "--out is required");
  const fs::path ckpt(o.checkpoint);
  Options with_config = o;
  if (with_config.config.empty()) with_config.config = (ckpt / "config.cfg").string();
  const auto config = resolve_config(with_config);
  const auto log = read_trip_file(o.data);
  HmodModel model(config, model_dims(config, log));
  require_file((ckpt / "model.ckpt").string(), "--checkpoint");
  model.load(ckpt / "model.ckpt");
  require_file((ckpt / "bank.ckpt").string(), "--checkpoint");
  MemoryBank bank = MemoryBank::load_from(TensorArchive::load(ckpt / "bank.ckpt"));
  const WindowedStream stream(log, config.delta_t);
  const auto split = split_windows(stream.window_count(), config);
  if (bank.node_count() != log.node_count()) {
    throw Error(ErrorKind::kData, "checkpoint bank has " + std::to_string(bank.node_count()) +
                                      " nodes, data has " + std::to_string(log.node_count()));
  }
  std::vector<MethodResult> results{{"HMOD", score_test(model, stream, split, bank)}};
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_results_csv(dir / "results.csv", results);
  write_results_json(dir / "results.json", results);
  RunManifest m;
  m.command = "evaluate";
  m.config = config;
  m.dataset = o.data;
  m.dataset_hash = dataset_fingerprint(log);
  m.seed = config.seed;
  m.threads = o.threads;
  m.artifacts = {{"checkpoint", fs::absolute(ckpt).lexically_normal().string()},
                 {"results_csv", "results.csv"},
                 {"results_json", "results.json"}};
  write_manifest(dir / "manifest.json", m);
  print_results(results);
  return 0;
}

int cmd_ablate(const Options& o) {
  require_file(o.data, "--data");
  if (o.out.empty()) throw Error(ErrorKind::kUsage, "--out is required");
  const auto base = resolve_config(o);
  const auto variants = o.variants.empty() ? ablation_variants() : o.variants;
  std::vector<TrainConfig> configs;
  for (const auto& v : variants) configs.push_back(apply_variant(base, v));
  const auto log = read_trip_file(o.data);
  const fs::path dir(o.out);
  fs::create_directories(dir);

  std::vector<std::optional<MethodResult>> rows(variants.size());
  std::vector<std::exception_ptr> failures(variants.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < variants.size();) {
      try {
        auto outcome = run_experiment(log, configs[i], false, {});
        write_run(dir / variants[i], outcome, configs[i]);
        rows[i] = MethodResult{variants[i], outcome.hmod};
        std::lock_guard lock(io);
        if (!o.quiet) {
          std::fprintf(stderr, "variant %s done: %zu epochs, test rmse %.4f\n",
                       variants[i].c_str(), outcome.fit.history.size(),
                       outcome.hmod.at(0.0).rmse);
        }
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(o.threads, 1, variants.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::vector<MethodResult> results;
  for (auto& r : rows) results.push_back(*r);
  write_results_csv(dir / "results.csv", results);
  write_results_json(dir / "results.json", results);
  RunManifest m;
  m.command = "ablate";
  m.config = base;
  m.dataset = o.data;
  m.dataset_hash = dataset_fingerprint(log);
  m.seed = base.seed;
  m.threads = o.threads;
  m.variants = variants;
  m.artifacts = {{"results_csv", "results.csv"}, {"results_json", "results.json"}};
  for (const auto& v : variants) m.artifacts["run." + v] = v + "/";
  write_manifest(dir / "manifest.json", m);
  print_results(results);
  return 0;
}

int cmd_walkdump(const Options& o) {
  require_file(o.data, "--data");
  if (o.out.empty()) throw Error(ErrorKind::kUsage, "--out is required");
  if (!o.time) throw Error(ErrorKind::kUsage, "--time is required");
  const auto config = resolve_config(o);
  const auto log = read_trip_file(o.data);
  if (o.anchor >= log.node_count()) {
    throw Error(ErrorKind::kUsage, "--anchor " + std::to_string(o.anchor) +
                                       " out of range for " +
                                       std::to_string(log.node_count()) + " nodes");
  }
  if (o.level > config.levels) {
    throw Error(ErrorKind::kUsage, "--level must be <= levels (" +
                                       std::to_string(config.levels) + ")");
  }
  const WindowedStream stream(log, config.delta_t);
  const double t = *o.time;
  std::optional<ODMatrix> od;
  std::optional<WalkSource> source;
  if (o.level == 0) {
    source = WalkSource::continuous(log, config.effective_horizon(), config.delta_t);
  } else {
    const double rel = (t - log.origin_time()) / config.delta_t;
    const auto end_window = static_cast<std::size_t>(
        std::clamp(std::floor(rel), 0.0, static_cast<double>(stream.window_count())));
    od = stream.span_od(end_window, std::size_t{1} << (o.level - 1));
    source = WalkSource::discrete(*od, config.walk_smoothing);
  }
  WalkOptions options{config.walk_length, config.walk_pairs, config.walk_smoothing};
  Rng rng(derive_seed({config.seed, o.anchor, o.level}));
  const auto walks = sample_walks(*source, o.anchor, o.level, t, options, rng);

  nlohmann::ordered_json doc;
  doc["anchor"] = o.anchor;
  doc["level"] = o.level;
  doc["time"] = t;
  auto& list = doc["walks"] = nlohmann::ordered_json::array();
  for (const auto& w : walks) {
    nlohmann::ordered_json j;
    j["parity"] = w.parity == Parity::kEven ? "even" : "odd";
    j["nodes"] = w.nodes;
    std::vector<std::string> roles;
    for (auto r : w.roles) roles.push_back(r == Role::kOrigin ? "origin" : "destination");
    j["roles"] = roles;
    j["sampled_steps"] = w.sampled_steps;
    list.push_back(j);
  }
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  {
    std::ofstream f(out);
    if (!f) throw Error(ErrorKind::kIo, "cannot write " + o.out);
    f << doc.dump(2) << '\n';
  }
  RunManifest m;
  m.command = "walkdump";
  m.config = config;
  m.dataset = o.data;
  m.dataset_hash = dataset_fingerprint(log);
  m.seed = config.seed;
  m.threads = o.threads;
  m.artifacts = {{"walks", out.filename().string()}};
  write_manifest(fs::path(o.out + ".manifest.json"), m);
  std::printf("wrote %zu walks to %s\n", walks.size(), o.out.c_str());
  return 0;
}

int fail(const std::string& category, const std::string& message, int code) {
  std::string line = message;
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::fprintf(stderr, "hmod: error[%s]: %s\n", category.c_str(), line.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hmod: hierarchical-memory OD demand forecasting"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "config file (spec file for generate)");
    sub->add_option("--out", o.out, "output path");
    sub->add_option("--seed", o.seed, "override the seed");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", o.quiet, "suppress progress output");
  };
  auto* gen = app.add_subcommand("generate", "sample a synthetic trip file");
  common(gen);
  auto* train = app.add_subcommand("train", "fit HMOD and score it against HA and LR");
  common(train);
  train->add_option("--data", o.data, "trip file");
  auto* eval = app.add_subcommand("evaluate", "score a trained run on the test split");
  common(eval);
  eval->add_option("--data", o.data, "trip file");
  eval->add_option("--checkpoint", o.checkpoint, "directory written by train");
  auto* ablate = app.add_subcommand("ablate", "train the ablation variant grid");
  common(ablate);
  ablate->add_option("--data", o.data, "trip file");
  ablate->add_option("--variant", o.variants, "variant (repeatable)");
  auto* walk = app.add_subcommand("walkdump", "dump sampled walks for one anchor");
  common(walk);
  walk->add_option("--data", o.data, "trip file");
  walk->add_option("--anchor", o.anchor, "anchor node");
  walk->add_option("--time", o.time, "anchor time (seconds)");
  walk->add_option("--level", o.level, "memory level (0 = continuous)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (gen->parsed()) return cmd_generate(o);
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_evaluate(o);
    if (ablate->parsed()) return cmd_ablate(o);
    return cmd_walkdump(o);
  } catch (const Error& e) {
    return fail(std::string(to_string(e.kind())), e.what(), e.kind() == ErrorKind::kUsage ? 2 : 1);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
}
