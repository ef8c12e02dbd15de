#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dlshif {

/// One reading across all m sensor streams.
using Point = Eigen::VectorXd;

/// A column-major block of points, one point per column (m x n).
using PointMatrix = Eigen::MatrixXd;

/// A point tagged with its ordinal in the stream.
struct DataPoint {
  std::uint64_t index = 0;
  Point values;

  Eigen::Index dim() const { return values.size(); }
};

/// Raised when a stream runs out before the model can be bootstrapped.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a metric is not defined for the given input (e.g. AUC over one class).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// CSV / config parse failure. `row` is 1-based over data rows, 0 when not row-specific.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

}  // namespace dlshif
