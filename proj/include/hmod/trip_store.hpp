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

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hmod {

class KeyValueFile;

using NodeId = std::uint32_t;

struct TripEvent {
  NodeId origin = 0;
  NodeId destination = 0;
  double timestamp = 0.0;  // seconds
  std::vector<double> features;

  bool operator==(const TripEvent&) const = default;
};

enum class Direction { kForward, kReverse };

// N x N demand counts over [window_start, window_end).
struct ODMatrix {
  std::size_t nodes = 0;
  std::vector<double> values;  // row-major, origin-major
  double window_start = 0.0;
  double window_end = 0.0;

  ODMatrix() = default;
  ODMatrix(std::size_t n, double start, double end)
      : nodes(n), values(n * n, 0.0), window_start(start), window_end(end) {}

  double operator()(std::size_t origin, std::size_t destination) const {
    return values[origin * nodes + destination];
  }
  double& operator()(std::size_t origin, std::size_t destination) {
    return values[origin * nodes + destination];
  }
  std::span<const double> row(std::size_t origin) const {
    return std::span(values).subspan(origin * nodes, nodes);
  }
  double total() const;
};

// Immutable, time-sorted trip stream with per-node incidence indices.
class EventLog {
 public:
  EventLog() = default;

  // Validates ids, feature widths and timestamps, then stable-sorts by time.
  // `end_time` is the declared end of the observation period; NaN means
  // "just past the last event".
  EventLog(std::size_t node_count, std::size_t feature_dim,
           std::vector<TripEvent> events, double origin_time = 0.0,
           bool allow_self_trips = true,
           double end_time = std::numeric_limits<double>::quiet_NaN());

  std::size_t node_count() const { return node_count_; }
  std::size_t feature_dim() const { return feature_dim_; }
  // Reference time of the dataset; window grids are anchored here.
  double origin_time() const { return origin_time_; }
  bool has_declared_end() const { return !std::isnan(end_time_); }
  // Declared end, else the last timestamp (origin_time when empty).
  double end_time() const;
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  std::span<const TripEvent> events() const { return events_; }

  // Events with t0 <= t < t1, in timestamp order. Throws if t0 >= t1.
  std::span<const TripEvent> window_events(double t0, double t1) const;
  ODMatrix od_matrix(double t0, double t1) const;

  // Forward: events leaving `node`; reverse: events arriving at it. Both
  // restricted to before - horizon <= t < before, in timestamp order.
  std::vector<TripEvent> candidates(NodeId node, Direction direction,
                                    double before, double horizon) const;
  // Same selection as indices into events().
  std::span<const std::uint32_t> candidate_indices(NodeId node,
                                                   Direction direction,
                                                   double before,
                                                   double horizon) const;

 private:
  std::size_t node_count_ = 0;
  std::size_t feature_dim_ = 0;
  double origin_time_ = 0.0;
  double end_time_ = std::numeric_limits<double>::quiet_NaN();
  std::vector<TripEvent> events_;
  std::vector<double> times_;
  std::vector<std::vector<std::uint32_t>> by_origin_;
  std::vector<std::vector<std::uint32_t>> by_destination_;
};

// Delimited trip files. First non-comment line is the header
//   hmod-trips,v1,nodes=<N>,features=<d_F>,origin=<seconds>[,end=<seconds>]
// followed by one event per line
//   <origin>,<destination>,<unix seconds>[,<feature>...]
// Lines starting with '#' and blank lines are skipped.
EventLog ingest(std::istream& in, const std::string& source = "<stream>");
EventLog read_trip_file(const std::filesystem::path& path);
void write_trips(std::ostream& out, const EventLog& log);
void write_trip_file(const std::filesystem::path& path, const EventLog& log);

// A daily bump added to the rate multiplier of selected pairs:
//   amplitude * exp(-0.5 * (circular_hour_distance(h, center) / width)^2)
struct DailyProfile {
  enum class Scope { kAll, kResidentialToBusiness, kBusinessToResidential };
  double center_hour = 8.0;
  double width_hours = 1.0;
  double amplitude = 0.0;
  Scope scope = Scope::kAll;
};

struct SyntheticSpec {
  std::size_t nodes = 4;
  double duration_s = 86400.0;
  double start_time = 0.0;
  double base_rate = 1.0;        // mean trips per hour per OD pair
  double rate_spread = 0.0;      // lognormal sigma of per-pair base rates
  double active_fraction = 1.0;  // share of pairs with non-zero demand
  double business_fraction = 0.5;
  double day_scale_sigma = 0.0;  // lognormal sigma of a per-day demand level
  double node_day_sigma = 0.0;   // per-(origin, day) lognormal sigma
  bool self_trips = true;
  std::size_t feature_dim = 0;
  std::uint64_t seed = 1;
  std::vector<DailyProfile> profiles;
  std::map<std::pair<NodeId, NodeId>, double> rate_overrides;  // trips/hour
};

// Keys: nodes, duration_s, start_time, base_rate, rate_spread,
// active_fraction, business_fraction, day_scale_sigma, node_day_sigma,
// self_trips,
// feature_dim, seed, profile.<name> = "<center_h> <width_h> <amplitude>
// [all|res_to_bus|bus_to_res]", rate.<i>.<j> = <trips/hour>.
SyntheticSpec parse_synthetic_spec(KeyValueFile& file);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

// Realized intensity of a synthetic spec: the random draws (pair base rates,
// node classes, per-day levels) fixed by a seed.
class SyntheticIntensity {
 public:
  SyntheticIntensity(const SyntheticSpec& spec, std::uint64_t seed);

  // Trips per hour of pair (i, j) at absolute time t.
  double rate(NodeId i, NodeId j, double t) const;
  // Upper bound of rate(i, j, .) over the whole duration.
  double peak_rate(NodeId i, NodeId j) const;
  bool is_business(NodeId node) const { return business_[node] != 0; }
  double base_rate(NodeId i, NodeId j) const { return base_[i * nodes_ + j]; }

 private:
  double multiplier(NodeId i, NodeId j, double hour_of_day) const;
  double day_level(NodeId origin, std::size_t day) const;

  SyntheticSpec spec_;
  std::size_t nodes_;
  std::vector<double> base_;
  std::vector<std::uint8_t> business_;
  std::vector<double> day_scale_;
  std::vector<double> node_day_;  // [day * nodes + node]
};

// Inhomogeneous Poisson trips per OD pair, sampled by thinning. The result
// depends only on (spec, seed).
EventLog generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace hmod
