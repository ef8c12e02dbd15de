#include "dlshif/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dlshif {

double auc(std::span<const LabeledScore> records) {
  std::vector<LabeledScore> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledScore& a, const LabeledScore& b) { return a.score < b.score; });

  // Sum of midranks of the positives.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    std::size_t tied_pos = 0;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      tied_pos += sorted[j].label ? 1 : 0;
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += midrank * static_cast<double>(tied_pos);
    positives += tied_pos;
    i = j;
  }
  const std::size_t negatives = sorted.size() - positives;
  if (positives == 0 || negatives == 0)
    throw UndefinedMetric("AUC needs at least one positive and one negative label");

  const double np = static_cast<double>(positives);
  const double nn = static_cast<double>(negatives);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

ClassificationSummary f1(std::span<const LabeledScore> records, double threshold) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& r : records) {
    const bool predicted = r.score > threshold;
    if (predicted && r.label) ++tp;
    else if (predicted) ++fp;
    else if (r.label) ++fn;
  }
  ClassificationSummary out;
  out.precision_degenerate = tp + fp == 0;
  out.recall_degenerate = tp + fn == 0;
  if (!out.precision_degenerate) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (!out.recall_degenerate) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (out.precision + out.recall > 0.0)
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

LatencySummary summarize_latency(std::span<const std::chrono::nanoseconds> latencies) {
  LatencySummary out;
  if (latencies.empty()) return out;
  std::vector<double> ns;
  ns.reserve(latencies.size());
  for (auto l : latencies) ns.push_back(static_cast<double>(l.count()));
  out.mean_ns = std::accumulate(ns.begin(), ns.end(), 0.0) / static_cast<double>(ns.size());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(ns.size())));
  const auto k = std::max<std::size_t>(rank, 1) - 1;
  std::nth_element(ns.begin(), ns.begin() + static_cast<std::ptrdiff_t>(k), ns.end());
  out.p99_ns = ns[k];
  return out;
}

std::vector<LabeledScore> label_records(std::span<const ScoreRecord> records,
                                        std::span<const std::uint8_t> labels) {
  std::vector<LabeledScore> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.point_index >= labels.size())
      throw std::out_of_range("no label for point " + std::to_string(r.point_index));
    out.push_back({r.score, labels[r.point_index] != 0});
  }
  return out;
}

MetricsReport evaluate(std::span<const ScoreRecord> records, std::span<const std::uint8_t> labels,
                       double threshold) {
  MetricsReport report;
  report.threshold = threshold;
  report.n_points = static_cast<double>(records.size());

  std::vector<std::chrono::nanoseconds> latencies;
  latencies.reserve(records.size());
  for (const auto& r : records) latencies.push_back(r.latency);
  const auto lat = summarize_latency(latencies);
  report.mean_latency_ns = lat.mean_ns;
  report.p99_latency_ns = lat.p99_ns;

  report.auc = std::numeric_limits<double>::quiet_NaN();
  if (labels.empty()) {
    report.f1 = report.precision = report.recall = std::numeric_limits<double>::quiet_NaN();
    report.n_anomalies = std::numeric_limits<double>::quiet_NaN();
    return report;
  }

  const auto labeled = label_records(records, labels);
  report.n_anomalies = static_cast<double>(
      std::count_if(labeled.begin(), labeled.end(), [](const auto& l) { return l.label; }));
  if (report.n_anomalies > 0 && report.n_anomalies < report.n_points) report.auc = auc(labeled);
  const auto cls = f1(labeled, threshold);
  report.precision = cls.precision;
  report.recall = cls.recall;
  report.f1 = cls.f1;
  return report;
}

std::vector<std::pair<std::string, double>> fields(const MetricsReport& r) {
  return {{"auc", r.auc},
          {"f1", r.f1},
          {"precision", r.precision},
          {"recall", r.recall},
          {"threshold", r.threshold},
          {"mean_latency_ns", r.mean_latency_ns},
          {"p99_latency_ns", r.p99_latency_ns},
          {"n_points", r.n_points},
          {"n_anomalies", r.n_anomalies}};
}

namespace {

// Field-wise accessors in the same order as fields().
constexpr double MetricsReport::*kMembers[] = {
    &MetricsReport::auc,           &MetricsReport::f1,
    &MetricsReport::precision,     &MetricsReport::recall,
    &MetricsReport::threshold,     &MetricsReport::mean_latency_ns,
    &MetricsReport::p99_latency_ns, &MetricsReport::n_points,
    &MetricsReport::n_anomalies};

}  // namespace

AggregateReport aggregate_runs(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate_runs: no reports");
  AggregateReport out;
  out.runs = reports.size();
  for (auto member : kMembers) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : reports)
      if (std::isfinite(r.*member)) {
        sum += r.*member;
        ++n;
      }
    if (n == 0) {
      out.mean.*member = out.stddev.*member = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const auto& r : reports)
      if (std::isfinite(r.*member)) sq += (r.*member - mean) * (r.*member - mean);
    out.mean.*member = mean;
    out.stddev.*member = std::sqrt(sq / static_cast<double>(n));
  }
  return out;
}

std::string to_key_value(const MetricsReport& report, const std::string& prefix) {
  std::ostringstream os;
  os << std::setprecision(12);
  for (const auto& [key, value] : fields(report)) os << prefix << key << '=' << value << '\n';
  return os.str();
}

std::string to_key_value(const AggregateReport& report) {
  return "runs=" + std::to_string(report.runs) + "\n" + to_key_value(report.mean, "mean_") +
         to_key_value(report.stddev, "std_");
}

}  // namespace dlshif
