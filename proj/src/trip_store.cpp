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

#include "hmod/trip_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hmod/config.hpp"
#include "hmod/error.hpp"
#include "hmod/random.hpp"

namespace hmod {

double ODMatrix::total() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

EventLog::EventLog(std::size_t node_count, std::size_t feature_dim,
                   std::vector<TripEvent> events, double origin_time,
                   bool allow_self_trips, double end_time)
    : node_count_(node_count),
      feature_dim_(feature_dim),
      origin_time_(origin_time),
      end_time_(end_time),
      events_(std::move(events)) {
  if (node_count_ == 0) throw Error(ErrorKind::kData, "event log needs N >= 1");
  if (has_declared_end() && !(end_time_ > origin_time_)) {
    throw Error(ErrorKind::kData, "declared end time must follow the origin");
  }
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    const auto where = "event " + std::to_string(i);
    if (e.origin >= node_count_ || e.destination >= node_count_) {
      throw Error(ErrorKind::kData, where + ": node id out of range (N = " +
                                        std::to_string(node_count_) + ")");
    }
    if (!allow_self_trips && e.origin == e.destination) {
      throw Error(ErrorKind::kData, where + ": self trip not permitted");
    }
    if (!std::isfinite(e.timestamp)) {
      throw Error(ErrorKind::kData, where + ": non-finite timestamp");
    }
    if (e.features.size() != feature_dim_) {
      throw Error(ErrorKind::kData, where + ": expected " +
                                        std::to_string(feature_dim_) +
                                        " features, got " +
                                        std::to_string(e.features.size()));
    }
  }
  std::stable_sort(events_.begin(), events_.end(),
                   [](const TripEvent& a, const TripEvent& b) {
                     return a.timestamp < b.timestamp;
                   });
  times_.reserve(events_.size());
  by_origin_.resize(node_count_);
  by_destination_.resize(node_count_);
  for (std::size_t i = 0; i < events_.size(); ++i) {
    times_.push_back(events_[i].timestamp);
    by_origin_[events_[i].origin].push_back(static_cast<std::uint32_t>(i));
    by_destination_[events_[i].destination].push_back(
        static_cast<std::uint32_t>(i));
  }
}

double EventLog::end_time() const {
  if (has_declared_end()) return end_time_;
  return events_.empty() ? origin_time_ : events_.back().timestamp;
}

namespace {

void check_window(double t0, double t1) {
  if (!(t0 < t1)) {
    throw Error(ErrorKind::kUsage, "window requires t0 < t1, got [" +
                                       std::to_string(t0) + ", " +
                                       std::to_string(t1) + ")");
  }
}

}  // namespace

std::span<const TripEvent> EventLog::window_events(double t0, double t1) const {
  check_window(t0, t1);
  const auto first = std::lower_bound(times_.begin(), times_.end(), t0);
  const auto last = std::lower_bound(first, times_.end(), t1);
  return std::span(events_).subspan(
      static_cast<std::size_t>(first - times_.begin()),
      static_cast<std::size_t>(last - first));
}

ODMatrix EventLog::od_matrix(double t0, double t1) const {
  ODMatrix m(node_count_, t0, t1);
  for (const auto& e : window_events(t0, t1)) m(e.origin, e.destination) += 1.0;
  return m;
}

std::span<const std::uint32_t> EventLog::candidate_indices(
    NodeId node, Direction direction, double before, double horizon) const {
  if (!(horizon > 0.0)) {
    throw Error(ErrorKind::kUsage, "candidates: horizon must be positive");
  }
  if (node >= node_count_) return {};
  const auto& index =
      direction == Direction::kForward ? by_origin_[node] : by_destination_[node];
  auto time_less = [this](std::uint32_t idx, double t) {
    return times_[idx] < t;
  };
  const auto first =
      std::lower_bound(index.begin(), index.end(), before - horizon, time_less);
  const auto last = std::lower_bound(first, index.end(), before, time_less);
  return std::span(index).subspan(static_cast<std::size_t>(first - index.begin()),
                                  static_cast<std::size_t>(last - first));
}

std::vector<TripEvent> EventLog::candidates(NodeId node, Direction direction,
                                            double before,
                                            double horizon) const {
  std::vector<TripEvent> out;
  for (auto idx : candidate_indices(node, direction, before, horizon)) {
    out.push_back(events_[idx]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trip files

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
      field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                              field.back() == '\r')) {
      field.remove_suffix(1);
    }
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
bool parse_field(std::string_view text, T& value) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end && !text.empty();
}

[[noreturn]] void line_error(const std::string& source, std::size_t line,
                             const std::string& what) {
  throw Error(ErrorKind::kData,
              source + ": line " + std::to_string(line) + ": " + what);
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

EventLog ingest(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  std::size_t nodes = 0, features = 0;
  double origin = 0.0;
  double end = std::numeric_limits<double>::quiet_NaN();
  std::vector<TripEvent> events;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 2 || fields[0] != "hmod-trips" || fields[1] != "v1") {
        line_error(source, number, "expected header 'hmod-trips,v1,...'");
      }
      bool got_nodes = false, got_features = false;
      for (std::size_t i = 2; i < fields.size(); ++i) {
        const auto eq = fields[i].find('=');
        const auto key = fields[i].substr(0, eq);
        const auto value = eq == std::string_view::npos
                               ? std::string_view{}
                               : fields[i].substr(eq + 1);
        bool ok = false;
        if (key == "nodes") ok = got_nodes = parse_field(value, nodes);
        else if (key == "features") ok = got_features = parse_field(value, features);
        else if (key == "origin") ok = parse_field(value, origin);
        else if (key == "end") ok = parse_field(value, end);
        if (!ok) {
          line_error(source, number,
                     "bad header field '" + std::string(fields[i]) + "'");
        }
      }
      if (!got_nodes || !got_features || nodes == 0) {
        line_error(source, number, "header must declare nodes>=1 and features");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 3 + features) {
      line_error(source, number,
                 "expected " + std::to_string(3 + features) + " fields, got " +
                     std::to_string(fields.size()));
    }
    TripEvent e;
    if (!parse_field(fields[0], e.origin) ||
        !parse_field(fields[1], e.destination)) {
      line_error(source, number, "malformed node id");
    }
    if (e.origin >= nodes || e.destination >= nodes) {
      line_error(source, number, "node id out of range (N = " +
                                     std::to_string(nodes) + ")");
    }
    if (!parse_field(fields[2], e.timestamp) || !std::isfinite(e.timestamp)) {
      line_error(source, number, "malformed timestamp");
    }
    e.features.resize(features);
    for (std::size_t f = 0; f < features; ++f) {
      if (!parse_field(fields[3 + f], e.features[f])) {
        line_error(source, number, "malformed feature " + std::to_string(f));
      }
    }
    events.push_back(std::move(e));
  }
  if (!have_header) {
    throw Error(ErrorKind::kData, source + ": missing 'hmod-trips' header");
  }
  return EventLog(nodes, features, std::move(events), origin, true, end);
}

EventLog read_trip_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return ingest(in, path.string());
}

void write_trips(std::ostream& out, const EventLog& log) {
  std::string line = "hmod-trips,v1,nodes=" + std::to_string(log.node_count()) +
                     ",features=" + std::to_string(log.feature_dim()) +
                     ",origin=";
  append_number(line, log.origin_time());
  if (log.has_declared_end()) {
    line += ",end=";
    append_number(line, log.end_time());
  }
  out << line << '\n';
  for (const auto& e : log.events()) {
    line.clear();
    line += std::to_string(e.origin);
    line += ',';
    line += std::to_string(e.destination);
    line += ',';
    append_number(line, e.timestamp);
    for (double f : e.features) {
      line += ',';
      append_number(line, f);
    }
    out << line << '\n';
  }
}

void write_trip_file(const std::filesystem::path& path, const EventLog& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_trips(out, log);
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Synthetic streams

namespace {

constexpr double kDay = 86400.0;

DailyProfile parse_profile(const std::string& key, const std::string& value) {
  const auto words = split_words(value);
  if (words.size() < 3 || words.size() > 4) {
    throw Error(ErrorKind::kConfig,
                "key '" + key +
                    "' expects '<center_h> <width_h> <amplitude> [scope]'");
  }
  DailyProfile p;
  auto number = [&](const std::string& w) {
    double v = 0.0;
    if (!parse_field(std::string_view(w), v)) {
      throw Error(ErrorKind::kConfig,
                  "key '" + key + "': bad number '" + w + "'");
    }
    return v;
  };
  p.center_hour = number(words[0]);
  p.width_hours = number(words[1]);
  p.amplitude = number(words[2]);
  if (!(p.width_hours > 0.0)) {
    throw Error(ErrorKind::kConfig, "key '" + key + "': width must be positive");
  }
  if (words.size() == 4) {
    if (words[3] == "all") p.scope = DailyProfile::Scope::kAll;
    else if (words[3] == "res_to_bus") p.scope = DailyProfile::Scope::kResidentialToBusiness;
    else if (words[3] == "bus_to_res") p.scope = DailyProfile::Scope::kBusinessToResidential;
    else throw Error(ErrorKind::kConfig, "key '" + key + "': unknown scope '" + words[3] + "'");
  }
  return p;
}

}  // namespace

SyntheticSpec parse_synthetic_spec(KeyValueFile& file) {
  SyntheticSpec spec;
  spec.nodes = file.get_uint("nodes", spec.nodes);
  spec.duration_s = file.get_double("duration_s", spec.duration_s);
  spec.start_time = file.get_double("start_time", spec.start_time);
  spec.base_rate = file.get_double("base_rate", spec.base_rate);
  spec.rate_spread = file.get_double("rate_spread", spec.rate_spread);
  spec.active_fraction = file.get_double("active_fraction", spec.active_fraction);
  spec.business_fraction =
      file.get_double("business_fraction", spec.business_fraction);
  spec.day_scale_sigma = file.get_double("day_scale_sigma", spec.day_scale_sigma);
  spec.node_day_sigma = file.get_double("node_day_sigma", spec.node_day_sigma);
  spec.self_trips = file.get_bool("self_trips", spec.self_trips);
  spec.feature_dim = file.get_uint("feature_dim", spec.feature_dim);
  spec.seed = file.get_uint("seed", spec.seed);
  for (const auto& key : file.keys_with_prefix("profile.")) {
    spec.profiles.push_back(parse_profile(key, file.raw(key)));
  }
  for (const auto& key : file.keys_with_prefix("rate.")) {
    const auto rest = key.substr(5);
    const auto dot = rest.find('.');
    NodeId i = 0, j = 0;
    double rate = 0.0;
    if (dot == std::string::npos ||
        !parse_field(std::string_view(rest).substr(0, dot), i) ||
        !parse_field(std::string_view(rest).substr(dot + 1), j) ||
        !parse_field(std::string_view(file.raw(key)), rate)) {
      throw Error(ErrorKind::kConfig, "key '" + key + "' expects rate.<i>.<j> = <trips/hour>");
    }
    spec.rate_overrides[{i, j}] = rate;
  }
  file.reject_unknown();

  if (spec.nodes == 0) throw Error(ErrorKind::kConfig, "nodes must be >= 1");
  if (!(spec.duration_s > 0.0)) {
    throw Error(ErrorKind::kConfig, "duration_s must be positive");
  }
  if (spec.base_rate < 0.0) {
    throw Error(ErrorKind::kConfig, "base_rate must be non-negative");
  }
  if (spec.day_scale_sigma < 0.0 || spec.node_day_sigma < 0.0 || spec.rate_spread < 0.0) {
    throw Error(ErrorKind::kConfig, "rate_spread, day_scale_sigma and node_day_sigma must be >= 0");
  }
  for (const auto& [pair, rate] : spec.rate_overrides) {
    if (rate < 0.0) {
      throw Error(ErrorKind::kConfig, "rate." + std::to_string(pair.first) +
                                          "." + std::to_string(pair.second) +
                                          " must be non-negative");
    }
    if (pair.first >= spec.nodes || pair.second >= spec.nodes) {
      throw Error(ErrorKind::kConfig, "rate override names a node >= nodes");
    }
  }
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  auto file = KeyValueFile::load(path);
  return parse_synthetic_spec(file);
}

SyntheticIntensity::SyntheticIntensity(const SyntheticSpec& spec,
                                       std::uint64_t seed)
    : spec_(spec), nodes_(spec.nodes) {
  if (spec.base_rate < 0.0) {
    throw Error(ErrorKind::kConfig, "base_rate must be non-negative");
  }
  for (const auto& [_, rate] : spec.rate_overrides) {
    if (rate < 0.0) throw Error(ErrorKind::kConfig, "negative pair rate");
  }
  Rng rng(derive_seed({seed, 0x696e74656e73ULL}));
  business_.resize(nodes_);
  for (auto& b : business_) b = rng.uniform() < spec.business_fraction ? 1 : 0;
  base_.assign(nodes_ * nodes_, 0.0);
  const double s = spec.rate_spread;
  for (NodeId i = 0; i < nodes_; ++i) {
    for (NodeId j = 0; j < nodes_; ++j) {
      // Draw unconditionally so toggling one option does not reshuffle others.
      const double z = rng.normal();
      const double keep = rng.uniform();
      if (i == j && !spec.self_trips) continue;
      if (keep >= spec.active_fraction) continue;
      base_[i * nodes_ + j] = spec.base_rate * std::exp(s * z - 0.5 * s * s);
    }
  }
  for (const auto& [pair, rate] : spec.rate_overrides) {
    base_[pair.first * nodes_ + pair.second] = rate;
  }
  const auto days = static_cast<std::size_t>(std::ceil(spec.duration_s / kDay)) + 1;
  const double sigma = spec.day_scale_sigma;
  day_scale_.resize(days);
  for (auto& d : day_scale_) d = std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
  Rng node_rng(derive_seed({seed, 0x6e6f6465646179ULL}));
  const double nsigma = spec.node_day_sigma;
  node_day_.resize(days * nodes_);
  for (auto& g : node_day_) g = std::exp(nsigma * node_rng.normal() - 0.5 * nsigma * nsigma);
}

double SyntheticIntensity::multiplier(NodeId i, NodeId j,
                                      double hour_of_day) const {
  double m = 1.0;
  for (const auto& p : spec_.profiles) {
    using Scope = DailyProfile::Scope;
    if (p.scope == Scope::kResidentialToBusiness &&
        !(!is_business(i) && is_business(j))) {
      continue;
    }
    if (p.scope == Scope::kBusinessToResidential &&
        !(is_business(i) && !is_business(j))) {
      continue;
    }
    double d = std::fabs(hour_of_day - p.center_hour);
    d = std::min(d, 24.0 - d);
    m += p.amplitude * std::exp(-0.5 * (d / p.width_hours) * (d / p.width_hours));
  }
  return std::max(m, 0.0);
}

double SyntheticIntensity::rate(NodeId i, NodeId j, double t) const {
  const double elapsed = t - spec_.start_time;
  const double day = std::floor(elapsed / kDay);
  const double hour = (elapsed - day * kDay) / 3600.0;
  const auto day_index = std::min(static_cast<std::size_t>(std::max(day, 0.0)),
                                  day_scale_.size() - 1);
  return base_[i * nodes_ + j] * multiplier(i, j, hour) * day_level(i, day_index);
}

double SyntheticIntensity::day_level(NodeId origin, std::size_t day) const {
  return day_scale_[day] * node_day_[day * nodes_ + origin];
}

double SyntheticIntensity::peak_rate(NodeId i, NodeId j) const {
  double bump = 1.0;
  for (const auto& p : spec_.profiles) bump += std::max(p.amplitude, 0.0);
  double day_peak = 0.0;
  for (std::size_t d = 0; d < day_scale_.size(); ++d) {
    day_peak = std::max(day_peak, day_level(i, d));
  }
  return base_[i * nodes_ + j] * bump * day_peak;
}

EventLog generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  const SyntheticIntensity intensity(spec, seed);
  const double end = spec.start_time + spec.duration_s;
  std::vector<TripEvent> events;
  for (NodeId i = 0; i < spec.nodes; ++i) {
    for (NodeId j = 0; j < spec.nodes; ++j) {
      const double peak = intensity.peak_rate(i, j) / 3600.0;  // per second
      if (!(peak > 0.0)) continue;
      Rng rng(derive_seed({seed, i, j}));
      double t = spec.start_time;
      while (true) {
        t += rng.exponential(peak);
        if (t >= end) break;
        const double accept = intensity.rate(i, j, t) / 3600.0 / peak;
        if (rng.uniform() >= accept) continue;
        TripEvent e{i, j, t, {}};
        e.features.resize(spec.feature_dim);
        for (std::size_t f = 0; f < spec.feature_dim; ++f) {
          // Feature 0 behaves like a trip distance; the rest are noise.
          e.features[f] = f == 0 ? 1.0 + 0.25 * std::abs(static_cast<double>(i) - j) +
                                       0.05 * rng.normal()
                                 : rng.normal();
        }
        events.push_back(std::move(e));
      }
    }
  }
  return EventLog(spec.nodes, spec.feature_dim, std::move(events),
                  spec.start_time, spec.self_trips,
                  spec.start_time + spec.duration_s);
}

}  // namespace hmod
