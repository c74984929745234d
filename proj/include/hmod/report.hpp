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

// Result files, run manifests and dataset fingerprints.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hmod/predictor.hpp"
#include "hmod/training.hpp"
#include "hmod/trip_store.hpp"

namespace hmod {

// FNV-1a over the canonical trip-file rendering of the log.
std::uint64_t dataset_fingerprint(const EventLog& log);
std::string hex64(std::uint64_t value);

struct MethodResult {
  std::string method;
  MetricReport report;
};

// One row per method and threshold: method,threshold,rmse,pcc,count.
// An undefined PCC is written as "nan" in CSV and null in JSON.
void write_results_csv(const std::filesystem::path& path,
                       const std::vector<MethodResult>& results);
// {"methods": [{"method": ..., "metrics": {"0": {"rmse", "pcc", "count"}}}]}
void write_results_json(const std::filesystem::path& path,
                        const std::vector<MethodResult>& results);
void write_history_csv(const std::filesystem::path& path,
                       const std::vector<EpochRecord>& history);

struct RunManifest {
  std::string command;
  TrainConfig config;
  std::string dataset;
  std::uint64_t dataset_hash = 0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::vector<std::string> variants;
  std::map<std::string, std::string> artifacts;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace hmod
