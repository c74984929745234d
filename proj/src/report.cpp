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

#include "hmod/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hmod/error.hpp"

namespace hmod {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace

std::uint64_t dataset_fingerprint(const EventLog& log) {
  std::ostringstream text;
  write_trips(text, log);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, 16);
  std::string s(buf, ptr);
  return std::string(16 - s.size(), '0') + s;
}

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<MethodResult>& results) {
  auto out = open_out(path);
  out << "method,threshold,rmse,pcc,count\n";
  for (const auto& r : results) {
    for (const auto& m : r.report.entries) {
      out << r.method << ',' << num(m.threshold) << ',' << num(m.rmse) << ','
          << (m.pcc ? num(*m.pcc) : "nan") << ',' << m.count << '\n';
    }
  }
  finish(out, path);
}

void write_results_json(const std::filesystem::path& path,
                        const std::vector<MethodResult>& results) {
  nlohmann::ordered_json doc;
  doc["columns"] = {"rmse", "pcc"};
  auto& methods = doc["methods"] = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json row;
    row["method"] = r.method;
    auto& cells = row["metrics"] = nlohmann::ordered_json::object();
    for (const auto& m : r.report.entries) {
      nlohmann::ordered_json cell;
      cell["rmse"] = m.rmse;
      cell["pcc"] = m.pcc ? nlohmann::ordered_json(*m.pcc) : nlohmann::ordered_json();
      cell["count"] = m.count;
      cells[num(m.threshold)] = cell;
    }
    methods.push_back(row);
  }
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<EpochRecord>& history) {
  auto out = open_out(path);
  out << "epoch,train_loss,val_rmse\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << num(h.train_loss) << ',' << num(h.val_rmse) << '\n';
  }
  finish(out, path);
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ostringstream config_text;
  write_train_config(config_text, m.config);
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::istringstream lines(config_text.str());
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) config[line.substr(0, eq)] = line.substr(eq + 3);
  }
  nlohmann::ordered_json doc;
  doc["command"] = m.command;
  doc["config"] = config;
  doc["dataset"] = m.dataset;
  doc["dataset_fnv1a"] = hex64(m.dataset_hash);
  doc["seed"] = m.seed;
  doc["threads"] = m.threads;
  if (!m.variants.empty()) doc["variants"] = m.variants;
  doc["artifacts"] = m.artifacts;
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

}  // namespace hmod
