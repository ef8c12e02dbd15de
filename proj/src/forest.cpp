#include "dlshif/forest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dlshif {

const TreeNode* TreeNode::child(HashKey key) const {
  auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it == keys.end() || *it != key) return nullptr;
  return &children[static_cast<std::size_t>(it - keys.begin())];
}

std::size_t height_limit(std::size_t sample_size) {
  if (sample_size == 0) throw std::invalid_argument("height_limit: sample size must be >= 1");
  return static_cast<std::size_t>(
      std::floor(2.0 * std::log2(static_cast<double>(sample_size)) + 0.8327));
}

std::vector<Eigen::Index> sample_window(Eigen::Index window_size, double exponent,
                                        std::mt19937_64& rng) {
  if (window_size < 1) throw std::invalid_argument("sample_window: empty window");
  const double rate = std::min(1.0, std::exp2(exponent) / static_cast<double>(window_size));
  std::vector<Eigen::Index> picked;
  if (rate >= 1.0) {
    picked.resize(static_cast<std::size_t>(window_size));
    for (Eigen::Index i = 0; i < window_size; ++i) picked[static_cast<std::size_t>(i)] = i;
    return picked;
  }
  std::bernoulli_distribution keep(rate);
  for (Eigen::Index i = 0; i < window_size; ++i)
    if (keep(rng)) picked.push_back(i);
  return picked;
}

std::vector<Eigen::Index> sample_window(Eigen::Index window_size, std::mt19937_64& rng) {
  if (window_size < 1) throw std::invalid_argument("sample_window: empty window");
  std::uniform_real_distribution<double> exponent(kMinSampleExponent, kMaxSampleExponent);
  return sample_window(window_size, exponent(rng), rng);
}

namespace {

TreeNode make_leaf(std::size_t size, std::size_t index) {
  TreeNode leaf;
  leaf.size = size;
  leaf.hash_index = index;
  return leaf;
}

TreeNode build_node(const Eigen::Ref<const PointMatrix>& points,
                    const std::vector<Eigen::Index>& subset, std::size_t limit,
                    std::size_t index, const HashFamily& family) {
  const std::size_t n = subset.size();
  if (n == 1 || index > limit) return make_leaf(n, index);

  Partition parts = lsh_split(points, subset, family[index]);
  // Single-branch hops are compressed: keep drawing functions until the
  // points separate or the height limit is passed.
  while (parts.size() == 1 && index <= limit) {
    ++index;
    parts = lsh_split(points, subset, family[index]);
  }
  if (index > limit) return make_leaf(n, index);

  TreeNode node;
  node.size = n;
  node.hash_index = index;
  node.keys.reserve(parts.size());
  node.children.reserve(parts.size());
  for (const auto& [key, members] : parts) {
    node.keys.push_back(key);
    node.children.push_back(build_node(points, members, limit, index + 1, family));
  }
  return node;
}

}  // namespace

std::optional<TreeNode> build_tree(const Eigen::Ref<const PointMatrix>& points,
                                   const std::vector<Eigen::Index>& subset,
                                   std::size_t limit, std::size_t start_index,
                                   const HashFamily& family) {
  if (subset.empty()) return std::nullopt;
  if (points.rows() != family.dim())
    throw std::invalid_argument("build_tree: point dimension does not match hash family");
  if (family.materialized() < limit + 2)
    throw std::invalid_argument("build_tree: hash family not materialized up to height_limit + 1");
  return build_node(points, subset, limit, start_index, family);
}

LSHiTree build_tree(const Eigen::Ref<const PointMatrix>& sample, HashFamily family) {
  LSHiTree tree{std::nullopt, std::move(family), 0, static_cast<std::size_t>(sample.cols())};
  if (sample.cols() == 0) return tree;
  tree.height_limit = height_limit(tree.sample_size);
  tree.family.materialize(tree.height_limit + 2);
  std::vector<Eigen::Index> all(static_cast<std::size_t>(sample.cols()));
  for (Eigen::Index j = 0; j < sample.cols(); ++j) all[static_cast<std::size_t>(j)] = j;
  tree.root = build_tree(sample, all, tree.height_limit, 0, tree.family);
  return tree;
}

Forest build_forest(const Eigen::Ref<const PointMatrix>& window, std::size_t num_trees,
                    std::uint64_t seed, const BuildOptions& options) {
  if (window.cols() == 0) throw std::invalid_argument("build_forest: empty window");
  if (num_trees == 0) throw std::invalid_argument("build_forest: need at least one tree");

  Forest forest;
  forest.build_seed = seed;
  forest.window_size = static_cast<std::size_t>(window.cols());
  forest.trees.reserve(num_trees);
  for (std::size_t i = 0; i < num_trees; ++i) {
    std::mt19937_64 rng(mix_seed(seed, 2 * i));
    HashFamily family(window.rows(), mix_seed(seed, 2 * i + 1), options.bin_width);
    if (options.sampling) {
      const auto picked = sample_window(window.cols(), rng);
      const PointMatrix sample = window(Eigen::all, picked);
      forest.trees.push_back(build_tree(sample, std::move(family)));
    } else {
      forest.trees.push_back(build_tree(window, std::move(family)));
    }
  }
  return forest;
}

PointMatrix to_matrix(const std::vector<DataPoint>& points) {
  if (points.empty()) return PointMatrix(0, 0);
  const Eigen::Index dim = points.front().dim();
  PointMatrix m(dim, static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].dim() != dim)
      throw std::invalid_argument("to_matrix: points have mixed dimensionality");
    m.col(static_cast<Eigen::Index>(j)) = points[j].values;
  }
  return m;
}

}  // namespace dlshif
