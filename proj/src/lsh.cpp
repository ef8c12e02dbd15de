#include "dlshif/lsh.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace dlshif {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

L2HashFunction derive_function(Eigen::Index dim, std::uint64_t seed, std::size_t index,
                               double width) {
  std::mt19937_64 rng(mix_seed(seed, index));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, width);

  L2HashFunction f;
  f.projection.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) f.projection[i] = normal(rng);
  f.offset = uniform(rng);
  f.width = width;
  return f;
}

HashFamily::HashFamily(Eigen::Index dim, std::uint64_t seed, double width)
    : dim_(dim), seed_(seed), width_(width) {
  if (dim < 1) throw std::invalid_argument("hash family dimensionality must be >= 1");
  if (!(width > 0.0) || !std::isfinite(width))
    throw std::invalid_argument("hash bin width must be positive and finite");
}

L2HashFunction HashFamily::function(std::size_t index) const {
  if (index < cache_.size()) return cache_[index];
  return derive_function(dim_, seed_, index, width_);
}

void HashFamily::materialize(std::size_t count) {
  cache_.reserve(count);
  for (std::size_t i = cache_.size(); i < count; ++i)
    cache_.push_back(derive_function(dim_, seed_, i, width_));
}

HashFamily make_family(Eigen::Index dim, std::uint64_t seed, double width) {
  return HashFamily(dim, seed, width);
}

namespace {

inline HashKey key_of(double projected, const L2HashFunction& f) {
  return HashKey{static_cast<std::int64_t>(std::floor((projected + f.offset) / f.width))};
}

void check_dim(const L2HashFunction& f, Eigen::Index dim) {
  if (dim != f.dim())
    throw std::invalid_argument("point dimension " + std::to_string(dim) +
                                " does not match hash dimension " + std::to_string(f.dim()));
}

}  // namespace

HashKey hash_point(const L2HashFunction& f, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(f, x.size());
  return key_of(f.projection.dot(x), f);
}

std::vector<HashKey> hash_columns(const L2HashFunction& f,
                                  const Eigen::Ref<const PointMatrix>& points) {
  check_dim(f, points.rows());
  const Eigen::RowVectorXd projected = f.projection.transpose() * points;
  std::vector<HashKey> keys(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index j = 0; j < points.cols(); ++j)
    keys[static_cast<std::size_t>(j)] = key_of(projected[j], f);
  return keys;
}

Partition lsh_split(const Eigen::Ref<const PointMatrix>& points, const L2HashFunction& f) {
  Partition out;
  const auto keys = hash_columns(f, points);
  for (Eigen::Index j = 0; j < points.cols(); ++j)
    out[keys[static_cast<std::size_t>(j)]].push_back(j);
  return out;
}

Partition lsh_split(const Eigen::Ref<const PointMatrix>& points,
                    const std::vector<Eigen::Index>& subset, const L2HashFunction& f) {
  check_dim(f, points.rows());
  Partition out;
  for (Eigen::Index j : subset)
    out[key_of(f.projection.dot(points.col(j)), f)].push_back(j);
  return out;
}

}  // namespace dlshif
