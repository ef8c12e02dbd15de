#pragma once

// Block-wise streaming detector.
//
// The first w points build the initial forest. Every later point is scored
// against the current forest and then buffered; when the buffer holds w
// points the forest is rebuilt from them and the buffer is cleared. Blocks
// never overlap, so a point is scored by a model built strictly from
// earlier points.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dlshif/forest.hpp"
#include "dlshif/scoring.hpp"

namespace dlshif {

struct EngineConfig {
  std::size_t window_size = 128;
  std::size_t num_trees = 60;
  double threshold = kDefaultThreshold;
  std::uint64_t seed = 0;
  bool score_initial_window = false;
  bool sampling_enabled = true;
  double bin_width = kDefaultBinWidth;
  int branching_factor = 2;
  double granularity = 1.0;
  Normalizer normalizer = Normalizer::PerTreeSample;

  void validate() const;
  ScoreParams score_params() const;
  BuildOptions build_options() const;
};

/// Fixed-capacity block buffer, stored column-wise.
class Window {
 public:
  Window(Eigen::Index dim, std::size_t capacity);

  void push(const Eigen::Ref<const Eigen::VectorXd>& x);
  void clear() { count_ = 0; }
  bool full() const { return count_ == capacity_; }
  std::size_t count() const { return count_; }
  std::size_t capacity() const { return capacity_; }
  /// The filled columns.
  auto points() const { return buffer_.leftCols(static_cast<Eigen::Index>(count_)); }

 private:
  PointMatrix buffer_;
  std::size_t capacity_;
  std::size_t count_ = 0;
};

class StreamEngine {
 public:
  /// Builds the initial model from exactly w points.
  static StreamEngine bootstrap(std::span<const DataPoint> first_window,
                                const EngineConfig& config);

  /// Scores one point, buffers it and rebuilds when the buffer fills.
  /// Points with the wrong dimension or non-finite values are rejected:
  /// nothing is buffered, `rejected()` is incremented and nullopt returned.
  std::optional<ScoreRecord> process_point(const DataPoint& x);

  /// Score without touching engine state.
  double score(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  const Forest& model() const { return model_; }
  const Window& window() const { return window_; }
  const EngineConfig& config() const { return config_; }
  std::size_t rebuild_epoch() const { return rebuild_epoch_; }
  /// Accepted points including the bootstrap block.
  std::uint64_t points_seen() const { return points_seen_; }
  std::uint64_t rejected() const { return rejected_; }
  Eigen::Index dim() const { return dim_; }

 private:
  StreamEngine(EngineConfig config, Eigen::Index dim);
  std::uint64_t next_build_seed();

  EngineConfig config_;
  ScoreParams params_;
  Eigen::Index dim_;
  Forest model_;
  Window window_;
  std::size_t rebuild_epoch_ = 0;
  std::uint64_t points_seen_ = 0;
  std::uint64_t rejected_ = 0;
};

/// Bootstraps on the first w points, then scores the rest in order.
/// Throws InsufficientData when fewer than w points are given.
std::vector<ScoreRecord> run_stream(std::span<const DataPoint> source,
                                    const EngineConfig& config);

/// Same, also returning the engine for inspection.
std::vector<ScoreRecord> run_stream(std::span<const DataPoint> source,
                                    const EngineConfig& config,
                                    std::optional<StreamEngine>& engine_out);

}  // namespace dlshif
