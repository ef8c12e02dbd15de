#pragma once

#include <chrono>
#include <cstdint>

#include "dlshif/forest.hpp"

namespace dlshif {

inline constexpr double kEulerGamma = 0.5772156649;
inline constexpr double kDefaultThreshold = 0.65;

/// Which sample size feeds the per-tree normalizer.
enum class Normalizer {
  PerTreeSample,  ///< mu(psi_i), psi_i = that tree's sample size
  WindowSize,     ///< mu(w) for every tree
};

struct ScoreParams {
  int branching_factor = 2;
  double granularity = 1.0;
  double threshold = kDefaultThreshold;
  Normalizer normalizer = Normalizer::PerTreeSample;

  /// Throws std::invalid_argument unless v >= 2 and threshold in (0, 1).
  void validate() const;
};

struct ScoreRecord {
  std::uint64_t point_index = 0;
  double score = 0.0;
  bool is_anomaly = false;
  std::chrono::nanoseconds latency{0};
  /// Time spent rebuilding the model right after this point; zero when no rebuild fired.
  std::chrono::nanoseconds rebuild_time{0};
};

/// Expected compressed depth for a sample of size psi with branching factor v.
double mu(double psi, int branching_factor = 2);

/// Compression-adjusted depth of x in `tree`; -1 for an empty tree.
double path_length(const Eigen::Ref<const Eigen::VectorXd>& x, const LSHiTree& tree,
                   const ScoreParams& params = {});

/// Mean of 2^(-h_i / mu_i) over the non-degenerate trees, in (0, 1].
///
/// Trees whose normalizer is zero (psi <= 1) carry no ranking information and
/// are left out of the mean. A forest made only of such trees scores 1.
double anomaly_score(const Eigen::Ref<const Eigen::VectorXd>& x, const Forest& forest,
                     const ScoreParams& params = {});

inline bool classify(double score, const ScoreParams& params = {}) {
  return score > params.threshold;
}

}  // namespace dlshif
