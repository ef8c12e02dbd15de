#include "dlshif/scoring.hpp"

#include <cmath>
#include <stdexcept>

namespace dlshif {

void ScoreParams::validate() const {
  if (branching_factor < 2) throw std::invalid_argument("branching factor must be >= 2");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("threshold must lie in (0, 1)");
}

double mu(double psi, int branching_factor) {
  if (branching_factor < 2) throw std::invalid_argument("mu: branching factor must be >= 2");
  const double v = branching_factor;
  if (psi <= 1.0) return 0.0;
  if (psi <= v) return 1.0;
  return (std::log(psi) + std::log(v - 1.0) + kEulerGamma) / std::log(v) - 0.5;
}

double path_length(const Eigen::Ref<const Eigen::VectorXd>& x, const LSHiTree& tree,
                   const ScoreParams& params) {
  if (!tree.root) return -1.0;
  if (x.size() != tree.family.dim())
    throw std::invalid_argument("path_length: point dimension does not match tree");

  const TreeNode* node = &*tree.root;
  double depth = 0.0;
  while (!node->is_leaf()) {
    const auto index = node->hash_index;
    const HashKey key = index < tree.family.materialized()
                            ? hash_point(tree.family[index], x)
                            : hash_point(tree.family.function(index), x);
    const TreeNode* next = node->child(key);
    if (next == nullptr) {
      // Unseen bucket: x would have been split off by the next function.
      const double e = static_cast<double>(index + 1) / (depth + 1.0);
      return (depth + 1.0) * std::pow(e, params.granularity);
    }
    node = next;
    depth += 1.0;
  }

  const double tail = mu(static_cast<double>(node->size), params.branching_factor);
  if (depth == 0.0) return tail;
  const double e = static_cast<double>(node->hash_index) / depth;
  return depth * std::pow(e, params.granularity) + tail;
}

double anomaly_score(const Eigen::Ref<const Eigen::VectorXd>& x, const Forest& forest,
                     const ScoreParams& params) {
  if (forest.empty()) throw std::invalid_argument("anomaly_score: empty forest");

  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& tree : forest.trees) {
    const double psi = params.normalizer == Normalizer::WindowSize
                           ? static_cast<double>(forest.window_size)
                           : static_cast<double>(tree.sample_size);
    const double norm = mu(psi, params.branching_factor);
    if (norm <= 0.0 || !tree.root) continue;
    sum += std::exp2(-path_length(x, tree, params) / norm);
    ++counted;
  }
  if (counted == 0) return 1.0;
  return sum / static_cast<double>(counted);
}

}  // namespace dlshif
