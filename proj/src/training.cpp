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

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include "hmod/archive.hpp"
#include "hmod/error.hpp"
#include "hmod/message_engine.hpp"
#include "hmod/random.hpp"

namespace hmod {

// ---------------------------------------------------------------------------
// Configuration

double TrainConfig::effective_horizon() const {
  if (candidate_horizon > 0.0) return candidate_horizon;
  const double longest = levels == 0 ? delta_t : std::ldexp(delta_t, static_cast<int>(levels) - 1);
  return 2.0 * longest;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kConfig, what); };
  if (!(delta_t > 0.0)) fail("delta_t must be positive");
  if (memory_dim == 0 || message_dim == 0 || head_hidden == 0) {
    fail("memory_dim, message_dim and head_hidden must be >= 1");
  }
  if (walk_length == 0 || walk_pairs == 0) fail("walk_length and walk_pairs must be >= 1");
  if (!(walk_smoothing > 0.0)) fail("walk_smoothing must be positive");
  if (candidate_horizon < 0.0) fail("candidate_horizon must be >= 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    fail("beta1 and beta2 must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
  if (max_epochs == 0) fail("max_epochs must be >= 1");
  if (patience > max_epochs) fail("patience must not exceed max_epochs");
  if (train_fraction <= 0.0 || val_fraction < 0.0 || test_fraction < 0.0 ||
      std::fabs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    fail("split fractions must be non-negative, train > 0, and sum to 1");
  }
  if (disable_continuous && levels == 0) {
    fail("disable_continuous needs at least one discrete level");
  }
  if (ha_mode != "slot" && ha_mode != "global") fail("ha_mode must be slot or global");
  if (thresholds.empty()) fail("thresholds must name at least one value");
  if (std::find(thresholds.begin(), thresholds.end(), 0.0) == thresholds.end()) {
    fail("thresholds must include 0 (model selection uses RMSE over all entries)");
  }
}

TrainConfig parse_train_config(KeyValueFile& file) {
  TrainConfig c;
  c.delta_t = file.get_double("delta_t", c.delta_t);
  c.levels = file.get_uint("levels", c.levels);
  c.fusion_layers = file.get_uint("fusion_layers", c.fusion_layers);
  c.memory_dim = file.get_uint("memory_dim", c.memory_dim);
  c.message_dim = file.get_uint("message_dim", c.message_dim);
  c.head_hidden = file.get_uint("head_hidden", c.head_hidden);
  c.learning_rate = file.get_double("learning_rate", c.learning_rate);
  c.beta1 = file.get_double("beta1", c.beta1);
  c.beta2 = file.get_double("beta2", c.beta2);
  c.adam_eps = file.get_double("adam_eps", c.adam_eps);
  c.max_epochs = file.get_uint("max_epochs", c.max_epochs);
  c.patience = file.get_uint("patience", c.patience);
  c.walk_length = file.get_uint("walk_length", c.walk_length);
  c.walk_pairs = file.get_uint("walk_pairs", c.walk_pairs);
  c.walk_smoothing = file.get_double("walk_smoothing", c.walk_smoothing);
  c.candidate_horizon = file.get_double("candidate_horizon", c.candidate_horizon);
  c.seed = file.get_uint("seed", c.seed);
  c.train_fraction = file.get_double("train_fraction", c.train_fraction);
  c.val_fraction = file.get_double("val_fraction", c.val_fraction);
  c.test_fraction = file.get_double("test_fraction", c.test_fraction);
  c.disable_continuous = file.get_bool("disable_continuous", c.disable_continuous);
  c.disable_embedding = file.get_bool("disable_embedding", c.disable_embedding);
  c.plain_mse = file.get_bool("plain_mse", c.plain_mse);
  c.use_event_features = file.get_bool("use_event_features", c.use_event_features);
  c.ha_mode = file.get_string("ha_mode", c.ha_mode);
  if (file.has("thresholds")) {
    c.thresholds.clear();
    for (const auto& w : split_words(file.raw("thresholds"))) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
      if (ec != std::errc() || ptr != w.data() + w.size()) {
        throw Error(ErrorKind::kConfig, "key 'thresholds': bad number '" + w + "'");
      }
      c.thresholds.push_back(v);
    }
  }
  file.reject_unknown();
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  auto file = KeyValueFile::load(path);
  return parse_train_config(file);
}

namespace {

std::string number_text(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void write_train_config(std::ostream& out, const TrainConfig& c) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "delta_t = " << number_text(c.delta_t) << '\n'
      << "levels = " << c.levels << '\n'
      << "fusion_layers = " << c.fusion_layers << '\n'
      << "memory_dim = " << c.memory_dim << '\n'
      << "message_dim = " << c.message_dim << '\n'
      << "head_hidden = " << c.head_hidden << '\n'
      << "learning_rate = " << number_text(c.learning_rate) << '\n'
      << "beta1 = " << number_text(c.beta1) << '\n'
      << "beta2 = " << number_text(c.beta2) << '\n'
      << "adam_eps = " << number_text(c.adam_eps) << '\n'
      << "max_epochs = " << c.max_epochs << '\n'
      << "patience = " << c.patience << '\n'
      << "walk_length = " << c.walk_length << '\n'
      << "walk_pairs = " << c.walk_pairs << '\n'
      << "walk_smoothing = " << number_text(c.walk_smoothing) << '\n'
      << "candidate_horizon = " << number_text(c.effective_horizon()) << '\n'
      << "seed = " << c.seed << '\n'
      << "train_fraction = " << number_text(c.train_fraction) << '\n'
      << "val_fraction = " << number_text(c.val_fraction) << '\n'
      << "test_fraction = " << number_text(c.test_fraction) << '\n'
      << "disable_continuous = " << b(c.disable_continuous) << '\n'
      << "disable_embedding = " << b(c.disable_embedding) << '\n'
      << "plain_mse = " << b(c.plain_mse) << '\n'
      << "use_event_features = " << b(c.use_event_features) << '\n'
      << "ha_mode = " << c.ha_mode << '\n'
      << "thresholds =";
  for (double p : c.thresholds) out << ' ' << number_text(p);
  out << '\n';
}

ModelDims model_dims(const TrainConfig& config, const EventLog& log) {
  ModelDims d;
  d.nodes = log.node_count();
  d.discrete_levels = config.levels;
  d.memory_dim = config.memory_dim;
  d.message_dim = config.message_dim;
  d.head_hidden = config.head_hidden;
  d.fusion_layers = config.fusion_layers;
  d.feature_dim = config.use_event_features ? log.feature_dim() : 0;
  d.continuous = !config.disable_continuous;
  return d;
}

// ---------------------------------------------------------------------------
// Windows

WindowedStream::WindowedStream(const EventLog& log, double delta_t)
    : log_(&log), delta_t_(delta_t) {
  if (!(delta_t > 0.0)) throw Error(ErrorKind::kUsage, "delta_t must be positive");
  std::size_t count = 0;
  const double origin = log.origin_time();
  if (log.has_declared_end()) {
    count = static_cast<std::size_t>(std::ceil((log.end_time() - origin) / delta_t - 1e-9));
  } else if (!log.empty()) {
    const double last = log.end_time();
    count = last < origin ? 0 : static_cast<std::size_t>(std::floor((last - origin) / delta_t)) + 1;
  }
  od_.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    od_.push_back(log.od_matrix(window_start(k), window_start(k + 1)));
  }
}

double WindowedStream::window_start(std::size_t k) const {
  return log_->origin_time() + static_cast<double>(k) * delta_t_;
}

std::span<const TripEvent> WindowedStream::events(std::size_t k) const {
  return log_->window_events(window_start(k), window_end(k));
}

ODMatrix WindowedStream::span_od(std::size_t end_window,
                                 std::size_t span_windows) const {
  const std::size_t begin = end_window > span_windows ? end_window - span_windows : 0;
  const auto n = log_->node_count();
  ODMatrix m(n, window_start(begin), window_start(end_window));
  for (std::size_t k = begin; k < end_window; ++k) {
    const auto& w = od_.at(k);
    for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] += w.values[i];
  }
  return m;
}

WindowSplit split_windows(std::size_t window_count, const TrainConfig& config) {
  WindowSplit s;
  const double k = static_cast<double>(window_count);
  s.train_end = std::min(window_count, static_cast<std::size_t>(std::llround(k * config.train_fraction)));
  s.val_end = std::min(window_count, s.train_end + static_cast<std::size_t>(std::llround(k * config.val_fraction)));
  s.test_end = window_count;
  return s;
}

// ---------------------------------------------------------------------------
// Model

HmodModel::HmodModel(const TrainConfig& config, const ModelDims& dims)
    : config_(config), dims_(dims) {
  config_.validate();
  register_message_params(params_, dims_);
  if (!config_.disable_embedding) register_walk_params(params_, dims_);
  register_head_params(params_, dims_);
  params_.init_uniform(derive_seed({config_.seed, 0x706172616d73ULL}));
  walk_options_.length = config_.walk_length;
  walk_options_.pairs = config_.walk_pairs;
  walk_options_.smoothing = config_.walk_smoothing;
}

MemoryBank HmodModel::make_bank(double t_start) const {
  return MemoryBank(dims_.nodes, dims_.discrete_levels, dims_.memory_dim,
                    t_start, dims_.message_dim, config_.delta_t);
}

bool HmodModel::level_fires(std::size_t level, std::size_t window) const {
  if (level == 0) return dims_.continuous;
  const std::size_t period = std::size_t{1} << (level - 1);
  return (window + 1) % period == 0;
}

std::vector<Tensor> HmodModel::process_window(const WindowedStream& stream,
                                              std::size_t window,
                                              MemoryBank& bank,
                                              std::uint64_t salt) const {
  const double t = stream.window_end(window);
  const std::size_t n = dims_.nodes;
  const std::size_t first = dims_.first_level();
  const std::size_t levels = dims_.level_count();
  const std::size_t active = dims_.active_levels();

  std::vector<std::optional<ODMatrix>> level_od(levels);
  std::vector<std::optional<WalkSource>> sources(levels);
  if (dims_.continuous) {
    sources[0] = WalkSource::continuous(stream.log(), config_.effective_horizon(),
                                        config_.delta_t);
  }
  for (std::size_t d = 1; d < levels; ++d) {
    if (!level_fires(d, window)) continue;
    level_od[d] = stream.span_od(window + 1, std::size_t{1} << (d - 1));
    sources[d] = WalkSource::discrete(*level_od[d], config_.walk_smoothing);
  }

  std::vector<std::vector<const TripEvent*>> departures(n);
  if (dims_.continuous) {
    for (const auto& e : stream.events(window)) departures[e.origin].push_back(&e);
  }

  auto embedding = [&](NodeId node, std::size_t level) {
    if (config_.disable_embedding) return Tensor::zeros({dims_.memory_dim});
    Rng rng(derive_seed({config_.seed, salt, window, node, level}));
    return embed_node(*sources[level], node, level, t, bank, params_,
                      walk_options_, rng);
  };

  // Phase 1: messages from the pre-window bank only.
  struct NodeUpdate {
    std::vector<Tensor> memories;  // H^d inputs, per active level
    std::vector<Tensor> fused;     // M^L_d, per active level
    std::vector<bool> frozen;      // true: level not updated this window
    bool any = false;
  };
  std::vector<NodeUpdate> updates(n);
  for (NodeId i = 0; i < n; ++i) {
    auto& u = updates[i];
    std::vector<Tensor> messages;
    for (std::size_t d = first; d < levels; ++d) {
      Tensor h = Tensor::vector(bank.read(i, d));
      std::optional<Tensor> raw;
      if (d == 0 && !departures[i].empty()) {
        std::vector<double> times;
        times.reserve(departures[i].size());
        for (const auto* e : departures[i]) times.push_back(e->timestamp);
        Tensor aggregated = batch_aggregate_continuous(bank.read(i, 0), times, t,
                                                       config_.delta_t);
        Tensor encoded = time_encode(h, t - bank.last_update(i, 0), params_);
        std::optional<Tensor> features;
        if (dims_.feature_dim > 0) {
          std::vector<double> mean(dims_.feature_dim, 0.0);
          for (const auto* e : departures[i]) {
            for (std::size_t f = 0; f < mean.size(); ++f) mean[f] += e->features[f];
          }
          for (auto& v : mean) v /= static_cast<double>(departures[i].size());
          features = Tensor::vector(mean);
        }
        raw = continuous_message_input(aggregated, encoded, embedding(i, 0),
                                       features ? &*features : nullptr);
      } else if (d > 0 && level_od[d]) {
        raw = discrete_message_input(h, level_od[d]->row(i), embedding(i, d));
      }
      u.memories.push_back(h);
      if (raw) {
        messages.push_back(compress_message(d, *raw, params_));
        u.frozen.push_back(false);
        u.any = true;
      } else {
        messages.push_back(Tensor::vector(bank.stored_message(i, d)));
        u.frozen.push_back(true);
      }
    }
    if (u.any) u.fused = fuse_messages(messages, dims_.fusion_layers, params_, u.frozen);
  }

  // Phase 2: commit in node order, then assemble H' rows.
  std::vector<Tensor> rows;
  rows.reserve(n);
  for (NodeId i = 0; i < n; ++i) {
    auto& u = updates[i];
    std::vector<Tensor> level_memories;
    level_memories.reserve(active);
    for (std::size_t a = 0; a < active; ++a) {
      if (u.any && !u.frozen[a]) {
        level_memories.push_back(
            commit_update(bank, i, first + a, u.memories[a], u.fused[a], t, params_));
      } else {
        level_memories.push_back(u.memories[a]);
      }
    }
    rows.push_back(fuse_memories(level_memories));
  }
  return rows;
}

Tensor HmodModel::predict(const std::vector<Tensor>& fused_rows) const {
  return predict_matrix(fused_rows, params_);
}

Tensor HmodModel::predict(const MemoryBank& bank) const {
  return predict_matrix(bank, params_, dims_.first_level());
}

void HmodModel::save(const std::string& path) const {
  TensorArchive archive;
  for (const auto& name : params_.names()) {
    const auto& t = params_.get(name);
    archive.put(name, t.shape(), t.to_vector());
  }
  archive.save(path);
}

void HmodModel::load(const std::string& path) {
  const auto archive = TensorArchive::load(path);
  ParamSet::Values values;
  for (const auto& name : params_.names()) {
    const auto& entry = archive.get(name);
    if (entry.shape != params_.get(name).shape()) {
      throw Error(ErrorKind::kData, "checkpoint parameter '" + name + "' has shape " +
                                        shape_string(entry.shape) + ", model expects " +
                                        shape_string(params_.get(name).shape()));
    }
    values[name] = entry.values;
  }
  if (archive.entries().size() != values.size()) {
    throw Error(ErrorKind::kData, "checkpoint holds parameters this model does not have");
  }
  params_.load_values(values);
}

// ---------------------------------------------------------------------------
// Training loop

EpochResult run_epoch(HmodModel& model, const WindowedStream& stream,
                      std::size_t begin, std::size_t end, MemoryBank& bank,
                      std::uint64_t salt) {
  const auto& config = model.config();
  const AdamOptions adam{config.learning_rate, config.beta1, config.beta2,
                         config.adam_eps};
  EpochResult result;
  double total = 0.0;
  for (std::size_t k = begin; k < end; ++k) {
    if (k + 1 >= end) {
      NoGradGuard no_grad;
      model.process_window(stream, k, bank, salt);
    } else {
      auto rows = model.process_window(stream, k, bank, salt);
      Tensor loss = od_loss(stream.od(k + 1), model.predict(rows), !config.plain_mse);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw Error(ErrorKind::kNumeric,
                    "non-finite loss at window " + std::to_string(k) +
                        " (t=" + std::to_string(stream.window_start(k)) +
                        "); try a lower learning_rate");
      }
      if (loss.requires_grad()) {
        backward(loss);
        model.params().adam_step(adam);
      }
      total += value;
      ++result.steps;
    }
    if (!bank.all_finite()) {
      throw Error(ErrorKind::kNumeric,
                  "non-finite memory after window " + std::to_string(k));
    }
  }
  result.mean_loss = result.steps ? total / static_cast<double>(result.steps) : 0.0;
  return result;
}

MetricReport evaluate(const HmodModel& model, const WindowedStream& stream,
                      std::size_t begin, std::size_t end, MemoryBank& bank,
                      MetricAccumulator* pooled) {
  NoGradGuard no_grad;
  MetricAccumulator local;
  MetricAccumulator& acc = pooled ? *pooled : local;
  for (std::size_t k = begin; k < end; ++k) {
    Tensor prediction = model.predict(bank);
    acc.add(stream.od(k).values, prediction.data());
    model.process_window(stream, k, bank, 0);
  }
  return acc.report(model.config().thresholds);
}

FitResult fit(HmodModel& model, const WindowedStream& stream,
              const WindowSplit& split, const EpochCallback& on_epoch) {
  const auto& config = model.config();
  FitResult result;
  MemoryBank bank = model.make_bank(stream.window_start(split.train_begin));
  const auto initial = bank.snapshot();
  const bool has_val = split.val_end > split.train_end;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    bank.restore(initial);
    const auto train = run_epoch(model, stream, split.train_begin,
                                 split.train_end, bank, epoch + 1);
    MetricAccumulator pooled;
    auto report = evaluate(model, stream, split.train_end, split.val_end, bank, &pooled);
    EpochRecord record{epoch, train.mean_loss,
                       has_val ? pooled.report({0.0}).at(0.0).rmse : 0.0};
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
    const double score = has_val ? record.val_rmse : record.train_loss;
    if (score < best) {
      best = score;
      stale = 0;
      result.best_epoch = epoch;
      result.best_params = model.params().values();
      result.best_bank = bank.snapshot();
      result.val_report = report;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  model.params().load_values(result.best_params);
  return result;
}

// ---------------------------------------------------------------------------
// Baselines

MetricReport baseline_ha(const WindowedStream& stream, const WindowSplit& split,
                         const TrainConfig& config, MetricAccumulator* pooled) {
  const auto cells = stream.log().node_count() * stream.log().node_count();
  constexpr double kDay = 86400.0;
  const double slots_real = kDay / stream.delta_t();
  const bool by_slot = config.ha_mode == "slot" &&
                       std::fabs(slots_real - std::round(slots_real)) < 1e-9;
  const std::size_t slots = by_slot ? static_cast<std::size_t>(std::llround(slots_real)) : 1;
  auto slot_of = [&](std::size_t k) -> std::size_t {
    if (!by_slot) return 0;
    const double tod = std::fmod(stream.window_start(k), kDay);
    const double s = std::floor((tod < 0 ? tod + kDay : tod) / stream.delta_t() + 1e-9);
    return static_cast<std::size_t>(s) % slots;
  };
  std::vector<std::vector<double>> sums(slots, std::vector<double>(cells, 0.0));
  std::vector<std::size_t> counts(slots, 0);
  std::vector<double> global(cells, 0.0);
  std::size_t global_count = 0;
  for (std::size_t k = split.train_begin; k < split.train_end; ++k) {
    const auto& y = stream.od(k).values;
    auto& s = sums[slot_of(k)];
    for (std::size_t c = 0; c < cells; ++c) {
      s[c] += y[c];
      global[c] += y[c];
    }
    ++counts[slot_of(k)];
    ++global_count;
  }
  MetricAccumulator local;
  MetricAccumulator& acc = pooled ? *pooled : local;
  std::vector<double> prediction(cells);
  for (std::size_t k = split.val_end; k < split.test_end; ++k) {
    const auto slot = slot_of(k);
    const bool seen = counts[slot] > 0;
    const auto& s = seen ? sums[slot] : global;
    const double n = static_cast<double>(seen ? counts[slot] : std::max<std::size_t>(global_count, 1));
    for (std::size_t c = 0; c < cells; ++c) prediction[c] = s[c] / n;
    acc.add(stream.od(k).values, prediction);
  }
  return acc.report(config.thresholds);
}

LagRegression fit_lag_regression(std::span<const std::vector<double>> lags,
                                 std::span<const double> targets) {
  if (lags.empty() || lags.size() != targets.size()) {
    throw Error(ErrorKind::kUsage, "lag regression needs matching, non-empty samples");
  }
  const std::size_t p = lags.front().size() + 1;  // + intercept
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  Eigen::VectorXd row(static_cast<Eigen::Index>(p));
  for (std::size_t s = 0; s < lags.size(); ++s) {
    if (lags[s].size() + 1 != p) throw Error(ErrorKind::kShape, "ragged lag rows");
    for (std::size_t j = 0; j + 1 < p; ++j) row[static_cast<Eigen::Index>(j)] = lags[s][j];
    row[static_cast<Eigen::Index>(p - 1)] = 1.0;
    gram.noalias() += row * row.transpose();
    moment += row * targets[s];
  }
  LagRegression out;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  lu.setThreshold(1e-10);
  if (lu.rank() < static_cast<Eigen::Index>(p)) {
    gram += 1e-6 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    out.ridge = true;
  }
  const Eigen::VectorXd beta = gram.ldlt().solve(moment);
  out.coefficients.assign(beta.data(), beta.data() + p - 1);
  out.intercept = beta[static_cast<Eigen::Index>(p - 1)];
  return out;
}

MetricReport baseline_lr(const WindowedStream& stream, const WindowSplit& split,
                         const TrainConfig& config, MetricAccumulator* pooled,
                         LagRegression* fitted) {
  const auto cells = stream.log().node_count() * stream.log().node_count();
  auto lag_row = [&](std::size_t k, std::size_t c) {
    std::vector<double> lags(kRegressionLags);
    for (std::size_t l = 0; l < kRegressionLags; ++l) lags[l] = stream.od(k - 1 - l).values[c];
    return lags;
  };
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  for (std::size_t k = split.train_begin + kRegressionLags; k < split.train_end; ++k) {
    for (std::size_t c = 0; c < cells; ++c) {
      rows.push_back(lag_row(k, c));
      targets.push_back(stream.od(k).values[c]);
    }
  }
  if (rows.empty() || split.val_end < kRegressionLags) {
    throw Error(ErrorKind::kData, "LR baseline needs more than " +
                                      std::to_string(kRegressionLags) +
                                      " training windows");
  }
  const auto model = fit_lag_regression(rows, targets);
  if (fitted) *fitted = model;
  MetricAccumulator local;
  MetricAccumulator& acc = pooled ? *pooled : local;
  std::vector<double> prediction(cells);
  for (std::size_t k = split.val_end; k < split.test_end; ++k) {
    for (std::size_t c = 0; c < cells; ++c) {
      double y = model.intercept;
      for (std::size_t l = 0; l < kRegressionLags; ++l) {
        y += model.coefficients[l] * stream.od(k - 1 - l).values[c];
      }
      prediction[c] = y;
    }
    acc.add(stream.od(k).values, prediction);
  }
  return acc.report(config.thresholds);
}

}  // namespace hmod
