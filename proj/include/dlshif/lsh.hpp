#pragma once

// l2 (2-stable) locality-sensitive hashing.
//
// h(x) = floor((a . x + b) / width), a ~ N(0, I_m), b ~ U[0, width).
// Nearby points collide with higher probability than distant ones, which is
// what lets a recursive split isolate sparse points quickly.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "dlshif/types.hpp"

namespace dlshif {

struct HashKey {
  std::int64_t value = 0;

  friend auto operator<=>(const HashKey&, const HashKey&) = default;
};

struct L2HashFunction {
  Eigen::VectorXd projection;
  double offset = 0.0;
  double width = 1.0;

  Eigen::Index dim() const { return projection.size(); }
};

inline constexpr double kDefaultBinWidth = 1.0;

/// An unbounded, indexable sequence of hash functions.
///
/// The function at index I depends only on (seed, I, dim, width). Functions
/// below `materialized()` are cached; higher indices are derived on demand,
/// so a family is safe to share between concurrent readers once built.
class HashFamily {
 public:
  HashFamily(Eigen::Index dim, std::uint64_t seed, double width = kDefaultBinWidth);

  /// Function I, by value. Always valid.
  L2HashFunction function(std::size_t index) const;

  /// Function I by reference; requires index < materialized().
  const L2HashFunction& operator[](std::size_t index) const { return cache_[index]; }

  /// Extend the cache to cover indices [0, count). Not thread-safe.
  void materialize(std::size_t count);
  std::size_t materialized() const { return cache_.size(); }

  Eigen::Index dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  double width() const { return width_; }

 private:
  Eigen::Index dim_;
  std::uint64_t seed_;
  double width_;
  std::vector<L2HashFunction> cache_;
};

/// Throws std::invalid_argument for dim < 1 or a non-positive width.
HashFamily make_family(Eigen::Index dim, std::uint64_t seed, double width = kDefaultBinWidth);

/// Derive the function at `index` from (seed, index, dim, width).
L2HashFunction derive_function(Eigen::Index dim, std::uint64_t seed, std::size_t index,
                               double width = kDefaultBinWidth);

/// floor((projection . x + offset) / width). Throws on dimension mismatch.
HashKey hash_point(const L2HashFunction& f, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Keys for every column of `points`.
std::vector<HashKey> hash_columns(const L2HashFunction& f,
                                  const Eigen::Ref<const PointMatrix>& points);

/// Column indices of `points` grouped by hash key. Keys are ordered; each
/// bucket keeps the input column order.
using Partition = std::map<HashKey, std::vector<Eigen::Index>>;

Partition lsh_split(const Eigen::Ref<const PointMatrix>& points, const L2HashFunction& f);

/// Same as above over a subset of columns; bucket entries are values from `subset`.
Partition lsh_split(const Eigen::Ref<const PointMatrix>& points,
                    const std::vector<Eigen::Index>& subset, const L2HashFunction& f);

/// Mixes a seed with a stream index (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace dlshif

template <>
struct std::hash<dlshif::HashKey> {
  std::size_t operator()(const dlshif::HashKey& k) const noexcept {
    return std::hash<std::int64_t>{}(k.value);
  }
};
