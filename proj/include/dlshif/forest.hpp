#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dlshif/lsh.hpp"
#include "dlshif/types.hpp"

namespace dlshif {

/// A node of a compressed multi-branch trie.
///
/// `hash_index` is the index of the function that split this node (internal)
/// or the index the build stopped at (leaf). `keys` is sorted and parallel
/// to `children`.
struct TreeNode {
  std::size_t size = 0;
  std::size_t hash_index = 0;
  std::vector<HashKey> keys;
  std::vector<TreeNode> children;

  bool is_leaf() const { return children.empty(); }

  /// Child for `key`, or nullptr.
  const TreeNode* child(HashKey key) const;
};

struct LSHiTree {
  std::optional<TreeNode> root;
  HashFamily family;
  std::size_t height_limit = 0;
  std::size_t sample_size = 0;
};

struct Forest {
  std::vector<LSHiTree> trees;
  std::uint64_t build_seed = 0;
  /// Number of points the forest was built from (before per-tree sampling).
  std::size_t window_size = 0;

  std::size_t size() const { return trees.size(); }
  bool empty() const { return trees.empty(); }
};

struct BuildOptions {
  double bin_width = kDefaultBinWidth;
  /// When false every tree sees the whole window.
  bool sampling = true;
};

/// floor(2 log2(psi) + 0.8327). Throws for psi == 0.
std::size_t height_limit(std::size_t sample_size);

/// Sampling exponent bounds: s ~ U(6, 10), rate = min(1, 2^s / n).
inline constexpr double kMinSampleExponent = 6.0;
inline constexpr double kMaxSampleExponent = 10.0;

/// Bernoulli sample of window columns at rate min(1, 2^s / n) with s drawn
/// from U(6, 10). Returns column indices in window order.
std::vector<Eigen::Index> sample_window(Eigen::Index window_size, std::mt19937_64& rng);

/// Same, with the exponent fixed.
std::vector<Eigen::Index> sample_window(Eigen::Index window_size, double exponent,
                                        std::mt19937_64& rng);

/// Recursive trie construction over the columns `subset` of `points`.
/// Returns nullopt for an empty subset. `family` must have at least
/// height_limit + 2 functions materialized.
std::optional<TreeNode> build_tree(const Eigen::Ref<const PointMatrix>& points,
                                   const std::vector<Eigen::Index>& subset,
                                   std::size_t height_limit, std::size_t start_index,
                                   const HashFamily& family);

/// Builds one tree over all columns of `sample`, materializing its family.
LSHiTree build_tree(const Eigen::Ref<const PointMatrix>& sample, HashFamily family);

/// t trees, each over its own sample with its own family seeded from (seed, tree index).
Forest build_forest(const Eigen::Ref<const PointMatrix>& window, std::size_t num_trees,
                    std::uint64_t seed, const BuildOptions& options = {});

/// Packs points column-wise.
PointMatrix to_matrix(const std::vector<DataPoint>& points);

}  // namespace dlshif
