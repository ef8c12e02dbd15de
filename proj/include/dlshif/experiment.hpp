#pragma once

// Experiment plumbing shared by the CLI: the detect pipeline, the parameter
// sweep and their on-disk formats.
//
// Layout of a sweep output directory:
//
//   summary.csv                       one row per (w, t, b) cell
//   w<W>_t<T>_b<B>/scores_r<K>.csv    per-point scores of repeat K
//   w<W>_t<T>_b<B>/metrics_r<K>.txt   key=value metrics of repeat K
//   w<W>_t<T>_b<B>/metrics.txt        repeat-averaged metrics
//   w<W>_t<T>_b<B>/convergence.csv    running mean AUC over repeats

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dlshif/dataset.hpp"
#include "dlshif/metrics.hpp"
#include "dlshif/stream_engine.hpp"

namespace dlshif {

inline constexpr const char* kScoresHeader = "point_index,score,is_anomaly,latency_ns";

/// Header plus one line per record; scores carry 12 significant digits.
/// With `with_latency` false the latency column is written as 0.
void write_scores_csv(std::ostream& out, const std::vector<ScoreRecord>& records,
                      bool with_latency = true);

enum class ScaleMode {
  Offline,    ///< fit on the whole input before subset selection
  Bootstrap,  ///< fit on the first w points of the stream only
  None,
};

struct DetectOptions {
  EngineConfig engine;
  std::optional<std::size_t> subset_size;
  ScaleMode scale = ScaleMode::Offline;
};

struct DetectResult {
  std::vector<ScoreRecord> records;
  MetricsReport metrics;
  std::vector<std::uint8_t> labels;  ///< labels of the streamed rows, if any
  std::uint64_t rejected = 0;
  std::size_t rebuilds = 0;
};

/// Scale, optionally subset, and stream `data` through the engine.
DetectResult run_detection(const Dataset& data, const DetectOptions& options);

struct ExperimentSpec {
  std::string input;
  std::optional<std::string> label_column;
  std::vector<std::size_t> window_sizes{128};
  std::vector<std::size_t> tree_counts{60};
  /// Subset sizes b; 0 means the whole dataset.
  std::vector<std::size_t> subset_sizes{0};
  std::size_t repeats = 60;
  std::uint64_t seed = 0;
  double threshold = kDefaultThreshold;
  bool sampling = true;
  bool score_initial_window = false;
  double bin_width = kDefaultBinWidth;
  ScaleMode scale = ScaleMode::Offline;
  std::filesystem::path output_dir = "sweep_out";
  bool write_scores = true;
  bool record_latency = true;

  void validate() const;
};

struct CellResult {
  std::size_t window_size = 0;
  std::size_t num_trees = 0;
  std::size_t subset_size = 0;
  std::vector<MetricsReport> runs;
  std::vector<std::string> failures;
  std::optional<AggregateReport> aggregate;
};

struct SweepResult {
  std::vector<CellResult> cells;
};

/// Runs every (w, t, b) cell `repeats` times and writes the directory layout
/// above. A failing repeat is recorded in its cell and the sweep continues.
SweepResult run_experiment(const ExperimentSpec& spec);

/// Running mean of `values` after each prefix length.
std::vector<double> running_mean(const std::vector<double>& values);

void write_summary_csv(std::ostream& out, const SweepResult& result);

}  // namespace dlshif
