#pragma once

#include <chrono>
#include <cstdint>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dlshif/scoring.hpp"

namespace dlshif {

struct LabeledScore {
  double score = 0.0;
  bool label = false;  ///< true = anomaly
};

struct ClassificationSummary {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_degenerate = false;  ///< no predicted positives
  bool recall_degenerate = false;     ///< no actual positives
};

struct LatencySummary {
  double mean_ns = 0.0;
  double p99_ns = 0.0;
};

struct MetricsReport {
  double auc = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = kDefaultThreshold;
  double mean_latency_ns = 0.0;
  double p99_latency_ns = 0.0;
  double n_points = 0;
  double n_anomalies = 0;
};

struct AggregateReport {
  MetricsReport mean;
  MetricsReport stddev;
  std::size_t runs = 0;
};

/// Mann-Whitney AUC with half credit for ties. O(n log n).
/// Throws UndefinedMetric unless both classes are present.
double auc(std::span<const LabeledScore> records);

/// Precision, recall and F1 at `score > threshold`. Zero denominators yield 0
/// and set the matching degenerate flag.
ClassificationSummary f1(std::span<const LabeledScore> records, double threshold = kDefaultThreshold);

/// Mean and 99th percentile (nearest rank).
LatencySummary summarize_latency(std::span<const std::chrono::nanoseconds> latencies);

/// Attaches labels[point_index] to every record.
std::vector<LabeledScore> label_records(std::span<const ScoreRecord> records,
                                        std::span<const std::uint8_t> labels);

/// AUC (NaN unless both classes are present), F1 and latency over a run.
MetricsReport evaluate(std::span<const ScoreRecord> records, std::span<const std::uint8_t> labels,
                       double threshold);

/// Field-wise mean and population standard deviation over the finite values.
AggregateReport aggregate_runs(std::span<const MetricsReport> reports);

/// Flat `key=value` lines, fields in a fixed order.
std::string to_key_value(const MetricsReport& report, const std::string& prefix = "");
std::string to_key_value(const AggregateReport& report);

/// Field name -> value, in serialization order.
std::vector<std::pair<std::string, double>> fields(const MetricsReport& report);

}  // namespace dlshif
