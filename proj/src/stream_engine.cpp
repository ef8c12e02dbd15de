#include "dlshif/stream_engine.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace dlshif {

using Clock = std::chrono::steady_clock;

void EngineConfig::validate() const {
  if (window_size < 2) throw std::invalid_argument("window size must be >= 2");
  if (num_trees < 1) throw std::invalid_argument("number of trees must be >= 1");
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
  score_params().validate();
}

ScoreParams EngineConfig::score_params() const {
  return ScoreParams{branching_factor, granularity, threshold, normalizer};
}

BuildOptions EngineConfig::build_options() const {
  return BuildOptions{bin_width, sampling_enabled};
}

Window::Window(Eigen::Index dim, std::size_t capacity)
    : buffer_(dim, static_cast<Eigen::Index>(capacity)), capacity_(capacity) {}

void Window::push(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (full()) throw std::logic_error("window overflow");
  buffer_.col(static_cast<Eigen::Index>(count_++)) = x;
}

StreamEngine::StreamEngine(EngineConfig config, Eigen::Index dim)
    : config_(config), params_(config.score_params()), dim_(dim),
      window_(dim, config.window_size) {}

std::uint64_t StreamEngine::next_build_seed() {
  return mix_seed(config_.seed, rebuild_epoch_);
}

StreamEngine StreamEngine::bootstrap(std::span<const DataPoint> first_window,
                                     const EngineConfig& config) {
  config.validate();
  if (first_window.size() != config.window_size)
    throw std::invalid_argument("bootstrap needs exactly " + std::to_string(config.window_size) +
                                " points, got " + std::to_string(first_window.size()));
  const Eigen::Index dim = first_window.front().dim();
  if (dim < 1) throw std::invalid_argument("bootstrap: points have no coordinates");

  StreamEngine engine(config, dim);
  for (const auto& p : first_window) {
    if (p.dim() != dim || !p.values.allFinite())
      throw std::invalid_argument("bootstrap: point " + std::to_string(p.index) +
                                  " has the wrong dimension or a non-finite value");
    engine.window_.push(p.values);
  }
  engine.model_ = build_forest(engine.window_.points(), config.num_trees,
                               engine.next_build_seed(), config.build_options());
  engine.window_.clear();
  engine.points_seen_ = first_window.size();
  return engine;
}

double StreamEngine::score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return anomaly_score(x, model_, params_);
}

std::optional<ScoreRecord> StreamEngine::process_point(const DataPoint& x) {
  const auto arrival = Clock::now();
  if (x.dim() != dim_ || !x.values.allFinite()) {
    ++rejected_;
    return std::nullopt;
  }

  ScoreRecord record;
  record.point_index = x.index;
  record.score = score(x.values);
  record.is_anomaly = classify(record.score, params_);
  record.latency = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - arrival);

  window_.push(x.values);
  ++points_seen_;
  if (window_.full()) {
    const auto start = Clock::now();
    ++rebuild_epoch_;
    model_ = build_forest(window_.points(), config_.num_trees, next_build_seed(),
                          config_.build_options());
    window_.clear();
    record.rebuild_time =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  }
  return record;
}

std::vector<ScoreRecord> run_stream(std::span<const DataPoint> source,
                                    const EngineConfig& config,
                                    std::optional<StreamEngine>& engine_out) {
  config.validate();
  if (source.size() < config.window_size)
    throw InsufficientData("stream has " + std::to_string(source.size()) +
                           " points, bootstrap needs " + std::to_string(config.window_size));

  auto engine = StreamEngine::bootstrap(source.first(config.window_size), config);
  std::vector<ScoreRecord> records;
  records.reserve(config.score_initial_window ? source.size()
                                              : source.size() - config.window_size);

  if (config.score_initial_window) {
    const auto params = config.score_params();
    for (const auto& p : source.first(config.window_size)) {
      const auto arrival = Clock::now();
      ScoreRecord r;
      r.point_index = p.index;
      r.score = engine.score(p.values);
      r.is_anomaly = classify(r.score, params);
      r.latency = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - arrival);
      records.push_back(r);
    }
  }

  for (const auto& p : source.subspan(config.window_size))
    if (auto r = engine.process_point(p)) records.push_back(*r);

  engine_out.emplace(std::move(engine));
  return records;
}

std::vector<ScoreRecord> run_stream(std::span<const DataPoint> source,
                                    const EngineConfig& config) {
  std::optional<StreamEngine> engine;
  return run_stream(source, config, engine);
}

}  // namespace dlshif
