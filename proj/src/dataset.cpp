#include "dlshif/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace dlshif {

std::vector<DataPoint> Dataset::points() const {
  std::vector<DataPoint> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].index = i;
    out[i].values = values.col(static_cast<Eigen::Index>(i));
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_double(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

}  // namespace

Dataset read_csv(std::istream& in, const std::optional<std::string>& label_column) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("CSV input is empty (no header)");

  const auto header = split(line);
  std::optional<std::size_t> label_at;
  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (label_column && header[c] == *label_column)
      label_at = c;
    else
      data.column_names.emplace_back(header[c]);
  }
  if (label_column && !label_at)
    throw ParseError("label column '" + *label_column + "' not found in header");

  std::vector<double> flat;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ParseError("row " + std::to_string(row) + ": expected " +
                           std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       row);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v || !std::isfinite(*v))
        throw ParseError("row " + std::to_string(row) + ", column '" + std::string(header[c]) +
                             "': not a finite number: '" + std::string(cells[c]) + "'",
                         row);
      if (label_at && c == *label_at) {
        if (*v != 0.0 && *v != 1.0)
          throw ParseError("row " + std::to_string(row) + ": label must be 0 or 1", row);
        data.labels.push_back(static_cast<std::uint8_t>(*v));
      } else {
        flat.push_back(*v);
      }
    }
  }

  const auto m = static_cast<Eigen::Index>(data.column_names.size());
  data.values = Eigen::Map<PointMatrix>(flat.data(), m, static_cast<Eigen::Index>(row));
  return data;
}

Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_csv(in, label_column);
}

void write_csv(std::ostream& out, const Dataset& data, const std::string& label_column) {
  for (std::size_t c = 0; c < data.column_names.size(); ++c)
    out << (c ? "," : "") << data.column_names[c];
  if (data.has_labels()) out << ',' << label_column;
  out << '\n';
  out << std::setprecision(12);
  for (Eigen::Index j = 0; j < data.values.cols(); ++j) {
    for (Eigen::Index c = 0; c < data.values.rows(); ++c)
      out << (c ? "," : "") << data.values(c, j);
    if (data.has_labels()) out << ',' << int(data.labels[static_cast<std::size_t>(j)]);
    out << '\n';
  }
}

std::vector<std::size_t> ScalerParams::degenerate_columns() const {
  std::vector<std::size_t> out;
  for (Eigen::Index c = 0; c < iqr.size(); ++c)
    if (iqr[c] == 0.0) out.push_back(static_cast<std::size_t>(c));
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ScalerParams fit_scaler(const Dataset& data, std::optional<std::size_t> rows) {
  const auto n = static_cast<Eigen::Index>(rows ? std::min(*rows, data.size()) : data.size());
  if (n == 0) throw std::invalid_argument("cannot fit a scaler on an empty dataset");
  ScalerParams p;
  p.column_names = data.column_names;
  p.median.resize(data.dim());
  p.iqr.resize(data.dim());
  for (Eigen::Index c = 0; c < data.dim(); ++c) {
    std::vector<double> col(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) col[static_cast<std::size_t>(j)] = data.values(c, j);
    p.median[c] = quantile(col, 0.5);
    p.iqr[c] = quantile(col, 0.75) - quantile(col, 0.25);
  }
  return p;
}

Dataset apply_scaler(const Dataset& data, const ScalerParams& params) {
  if (params.median.size() != data.dim())
    throw std::invalid_argument("scaler was fitted on a different number of columns");
  Dataset out = data;
  for (Eigen::Index c = 0; c < data.dim(); ++c) {
    if (params.iqr[c] == 0.0)
      out.values.row(c).setZero();
    else
      out.values.row(c) = (data.values.row(c).array() - params.median[c]) / params.iqr[c];
  }
  return out;
}

ScaledDataset robust_scale(const Dataset& data) {
  auto params = fit_scaler(data);
  auto scaled = apply_scaler(data, params);
  return {std::move(scaled), std::move(params)};
}

void write_scaler(std::ostream& out, const ScalerParams& params) {
  out << std::setprecision(17);
  out << "columns=";
  for (std::size_t c = 0; c < params.column_names.size(); ++c)
    out << (c ? "," : "") << params.column_names[c];
  out << "\nmedian=";
  for (Eigen::Index c = 0; c < params.median.size(); ++c) out << (c ? "," : "") << params.median[c];
  out << "\niqr=";
  for (Eigen::Index c = 0; c < params.iqr.size(); ++c) out << (c ? "," : "") << params.iqr[c];
  out << '\n';
}

ScalerParams read_scaler(std::istream& in) {
  ScalerParams p;
  std::vector<double> median, iqr;
  std::string line;
  std::size_t lineno = 0;
  auto numbers = [&](std::string_view rhs) {
    std::vector<double> v;
    for (auto cell : split(rhs)) {
      const auto d = parse_double(cell);
      if (!d) throw ParseError("scaler line " + std::to_string(lineno) + ": bad number", lineno);
      v.push_back(*d);
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto eq = line.find('=');
    if (trim(line).empty() || eq == std::string::npos) continue;
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto rhs = std::string_view(line).substr(eq + 1);
    if (key == "columns") {
      for (auto cell : split(rhs)) p.column_names.emplace_back(cell);
    } else if (key == "median") {
      median = numbers(rhs);
    } else if (key == "iqr") {
      iqr = numbers(rhs);
    }
  }
  if (median.size() != iqr.size() || median.empty())
    throw ParseError("scaler file needs median and iqr lines of equal length");
  p.median = Eigen::Map<Eigen::VectorXd>(median.data(), static_cast<Eigen::Index>(median.size()));
  p.iqr = Eigen::Map<Eigen::VectorXd>(iqr.data(), static_cast<Eigen::Index>(iqr.size()));
  return p;
}

Dataset select_subset(const Dataset& data, std::size_t b, std::mt19937_64& rng) {
  if (b > data.size())
    throw std::invalid_argument("subset size " + std::to_string(b) + " exceeds dataset size " +
                                std::to_string(data.size()));
  std::uniform_int_distribution<std::size_t> offset(0, data.size() - b);
  const auto start = static_cast<Eigen::Index>(offset(rng));
  Dataset out;
  out.column_names = data.column_names;
  out.values = data.values.middleCols(start, static_cast<Eigen::Index>(b));
  if (data.has_labels())
    out.labels.assign(data.labels.begin() + start, data.labels.begin() + start + static_cast<std::ptrdiff_t>(b));
  return out;
}

void SynthSpec::validate() const {
  if (!(outlier_rate >= 0.0 && outlier_rate < 0.5))
    throw std::invalid_argument("outlier rate must lie in [0, 0.5)");
  if (n < 1) throw std::invalid_argument("synthetic stream needs n >= 1");
  if (clusters.empty()) throw std::invalid_argument("synthetic stream needs a cluster");
  const auto m = clusters.front().mean.size();
  for (const auto& c : clusters)
    if (c.mean.size() != m || c.covariance.rows() != m || c.covariance.cols() != m || c.weight <= 0)
      throw std::invalid_argument("inconsistent cluster specification");
  if (box_low.size() != m || box_high.size() != m)
    throw std::invalid_argument("outlier box dimension mismatch");
  if (drift_at && drift_shift.size() != m)
    throw std::invalid_argument("drift shift dimension mismatch");
}

SynthSpec default_synth_spec(Eigen::Index dim, std::size_t n, double outlier_rate,
                             std::uint64_t seed, double box_half_width) {
  SynthSpec spec;
  // Correlated streams: unit variances with 0.5 pairwise correlation.
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(dim, dim, 0.5);
  cov.diagonal().setOnes();

  Eigen::VectorXd far(dim);
  for (Eigen::Index i = 0; i < dim; ++i) far[i] = (i % 2 == 0) ? 4.0 : -4.0;

  spec.clusters.push_back({Eigen::VectorXd::Zero(dim), cov, 0.7});
  spec.clusters.push_back({far, 0.5 * cov, 0.3});
  spec.box_low = Eigen::VectorXd::Constant(dim, -box_half_width);
  spec.box_high = Eigen::VectorXd::Constant(dim, box_half_width);
  spec.outlier_rate = outlier_rate;
  spec.n = n;
  spec.seed = seed;
  return spec;
}

Dataset synth_stream(const SynthSpec& spec) {
  spec.validate();
  const auto m = spec.clusters.front().mean.size();

  std::vector<Eigen::MatrixXd> factors;
  std::vector<double> weights;
  for (const auto& c : spec.clusters) {
    Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("cluster covariance is not positive definite");
    factors.push_back(llt.matrixL());
    weights.push_back(c.weight);
  }

  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution is_outlier(spec.outlier_rate);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Dataset data;
  data.values.resize(m, static_cast<Eigen::Index>(spec.n));
  data.labels.resize(spec.n);
  for (Eigen::Index c = 0; c < m; ++c) data.column_names.push_back("s" + std::to_string(c));

  Eigen::VectorXd z(m);
  for (std::size_t i = 0; i < spec.n; ++i) {
    auto col = data.values.col(static_cast<Eigen::Index>(i));
    if (is_outlier(rng)) {
      for (Eigen::Index c = 0; c < m; ++c)
        col[c] = spec.box_low[c] + unit(rng) * (spec.box_high[c] - spec.box_low[c]);
      data.labels[i] = 1;
      continue;
    }
    const auto k = pick(rng);
    for (Eigen::Index c = 0; c < m; ++c) z[c] = normal(rng);
    col = spec.clusters[k].mean + factors[k] * z;
    if (spec.drift_at && i >= *spec.drift_at) col += spec.drift_shift;
    data.labels[i] = 0;
  }
  return data;
}

}  // namespace dlshif
