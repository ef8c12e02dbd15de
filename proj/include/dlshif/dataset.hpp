#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dlshif/types.hpp"

namespace dlshif {

/// Rows of an m-stream recording, stored one point per column.
struct Dataset {
  PointMatrix values;                 ///< m x n
  std::vector<std::uint8_t> labels;   ///< empty, or one 0/1 per row (1 = anomaly)
  std::vector<std::string> column_names;

  std::size_t size() const { return static_cast<std::size_t>(values.cols()); }
  Eigen::Index dim() const { return values.rows(); }
  bool has_labels() const { return !labels.empty(); }

  /// Rows as stream points, indexed 0..n-1 in row order.
  std::vector<DataPoint> points() const;
};

/// Reads a headered CSV of numeric cells. When `label_column` is set that
/// column is split off as 0/1 labels. Throws ParseError naming the row.
Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column = {});
Dataset read_csv(std::istream& in, const std::optional<std::string>& label_column = {});

/// Writes values (and a trailing `label_column` when labels exist).
void write_csv(std::ostream& out, const Dataset& data, const std::string& label_column = "label");

struct ScalerParams {
  std::vector<std::string> column_names;
  Eigen::VectorXd median;
  Eigen::VectorXd iqr;  ///< q75 - q25

  /// Columns whose IQR is zero; they scale to 0.
  std::vector<std::size_t> degenerate_columns() const;
};

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// Median and IQR per column over all rows of `data` (first `rows` rows when given).
ScalerParams fit_scaler(const Dataset& data, std::optional<std::size_t> rows = {});

/// (x - median) / IQR per column; IQR == 0 columns map to 0.
Dataset apply_scaler(const Dataset& data, const ScalerParams& params);

struct ScaledDataset {
  Dataset data;
  ScalerParams params;
};

ScaledDataset robust_scale(const Dataset& data);

void write_scaler(std::ostream& out, const ScalerParams& params);
ScalerParams read_scaler(std::istream& in);

/// A contiguous block of b rows starting at a uniform offset in [0, n - b].
Dataset select_subset(const Dataset& data, std::size_t b, std::mt19937_64& rng);

struct GaussianCluster {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double weight = 1.0;
};

struct SynthSpec {
  std::vector<GaussianCluster> clusters;
  double outlier_rate = 0.02;
  /// Outliers are uniform over [box_low, box_high].
  Eigen::VectorXd box_low;
  Eigen::VectorXd box_high;
  /// From this ordinal on, every cluster mean is offset by `drift_shift`.
  std::optional<std::size_t> drift_at;
  Eigen::VectorXd drift_shift;
  std::size_t n = 10000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Two correlated Gaussian clusters in `dim` dimensions with outliers drawn
/// from the box [-box_half_width, box_half_width]^dim.
SynthSpec default_synth_spec(Eigen::Index dim, std::size_t n, double outlier_rate,
                             std::uint64_t seed, double box_half_width = 12.0);

/// Labeled stream: cluster inliers (label 0), box outliers (label 1).
Dataset synth_stream(const SynthSpec& spec);

}  // namespace dlshif
