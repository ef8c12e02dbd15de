#include <doctest.h>

#include <limits>
#include <random>

#include "dlshif/dataset.hpp"
#include "dlshif/stream_engine.hpp"
#include "test_helpers.hpp"

using namespace dlshif;

namespace {

std::vector<DataPoint> gaussian_stream(std::size_t n, Eigen::Index dim, std::uint64_t seed,
                                       double spread = 1.0) {
  std::mt19937_64 rng(seed);
  const auto m = testing::random_points(dim, static_cast<Eigen::Index>(n), rng, spread);
  std::vector<DataPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {i, m.col(static_cast<Eigen::Index>(i))};
  return out;
}

EngineConfig small_config(std::size_t w, std::size_t t, std::uint64_t seed = 1) {
  EngineConfig c;
  c.window_size = w;
  c.num_trees = t;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("bootstrap builds the initial model and empties the window") {
  const auto stream = gaussian_stream(128, 6, 1);
  const auto engine = StreamEngine::bootstrap(stream, small_config(128, 60));
  CHECK(engine.model().size() == 60);
  CHECK(engine.window().count() == 0);
  CHECK(engine.rebuild_epoch() == 0);
  CHECK(engine.points_seen() == 128);

  CHECK_THROWS_AS(StreamEngine::bootstrap(std::span(stream).first(100), small_config(128, 60)),
                  std::invalid_argument);
}

TEST_CASE("bootstrap on two identical points gives a root leaf") {
  std::vector<DataPoint> two{{0, Eigen::Vector3d(1, 2, 3)}, {1, Eigen::Vector3d(1, 2, 3)}};
  const auto engine = StreamEngine::bootstrap(two, small_config(2, 1));
  REQUIRE(engine.model().size() == 1);
  const auto& tree = engine.model().trees[0];
  REQUIRE(tree.root.has_value());
  CHECK(tree.root->is_leaf());
  CHECK(tree.root->size == 2);
}

TEST_CASE("config validation") {
  const auto stream = gaussian_stream(10, 2, 1);
  CHECK_THROWS_AS(StreamEngine::bootstrap(std::span(stream).first(1), small_config(1, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(StreamEngine::bootstrap(std::span(stream).first(4), small_config(4, 0)),
                  std::invalid_argument);
  auto bad = small_config(4, 2);
  bad.threshold = 1.5;
  CHECK_THROWS_AS(StreamEngine::bootstrap(std::span(stream).first(4), bad), std::invalid_argument);
}

TEST_CASE("bootstrap is deterministic") {
  const auto stream = gaussian_stream(64, 4, 3);
  const auto a = StreamEngine::bootstrap(stream, small_config(64, 10, 9));
  const auto b = StreamEngine::bootstrap(stream, small_config(64, 10, 9));
  CHECK(testing::fingerprint(a.model()) == testing::fingerprint(b.model()));
}

TEST_CASE("the w-th point is scored by the old model, then the rebuild fires") {
  const std::size_t w = 32;
  const auto stream = gaussian_stream(3 * w, 3, 5);
  auto engine = StreamEngine::bootstrap(std::span(stream).first(w), small_config(w, 8));
  for (std::size_t i = w; i < 2 * w - 1; ++i) {
    const auto r = engine.process_point(stream[i]);
    REQUIRE(r.has_value());
    CHECK(r->rebuild_time.count() == 0);
  }
  CHECK(engine.window().count() == w - 1);
  const auto old_fp = testing::fingerprint(engine.model());
  const double expected = engine.score(stream[2 * w - 1].values);

  const auto r = engine.process_point(stream[2 * w - 1]);
  REQUIRE(r.has_value());
  CHECK(r->score == expected);
  CHECK(r->point_index == 2 * w - 1);
  CHECK(engine.rebuild_epoch() == 1);
  CHECK(engine.window().count() == 0);
  CHECK(testing::fingerprint(engine.model()) != old_fp);
}

TEST_CASE("rebuild count follows the block count") {
  const std::size_t w = 16;
  const auto stream = gaussian_stream(w + 3 * w, 2, 7);
  std::optional<StreamEngine> engine;
  const auto records = run_stream(stream, small_config(w, 4), engine);
  CHECK(records.size() == 3 * w);
  CHECK(engine->rebuild_epoch() == 3);
  CHECK(engine->points_seen() == 4 * w);

  // Invariant epoch = floor((seen - w) / w) holds after every point.
  auto e = StreamEngine::bootstrap(std::span(stream).first(w), small_config(w, 4));
  for (std::size_t i = w; i < stream.size(); ++i) {
    e.process_point(stream[i]);
    CHECK(e.rebuild_epoch() == (e.points_seen() - w) / w);
  }
}

TEST_CASE("each block's scores come from a forest built on the previous block only") {
  const std::size_t w = 24;
  const auto cfg = small_config(w, 6, 11);
  const auto stream = gaussian_stream(5 * w, 3, 13);
  const auto records = run_stream(stream, cfg);
  REQUIRE(records.size() == 4 * w);

  const auto matrix = to_matrix(stream);
  for (std::size_t block = 1; block < 5; ++block) {
    // Independent reconstruction of the model that scored `block`.
    const auto model = build_forest(matrix.middleCols(static_cast<Eigen::Index>((block - 1) * w),
                                                      static_cast<Eigen::Index>(w)),
                                     cfg.num_trees, mix_seed(cfg.seed, block - 1),
                                     cfg.build_options());
    for (std::size_t i = block * w; i < (block + 1) * w; ++i)
      CHECK(records[i - w].score == anomaly_score(stream[i].values, model, cfg.score_params()));
  }
}

TEST_CASE("run_stream boundaries") {
  const std::size_t w = 20;
  const auto stream = gaussian_stream(2 * w, 2, 3);
  CHECK(run_stream(std::span(stream).first(w), small_config(w, 3)).empty());
  CHECK(run_stream(stream, small_config(w, 3)).size() == w);
  CHECK_THROWS_AS(run_stream(std::span(stream).first(w - 1), small_config(w, 3)), InsufficientData);

  auto with_initial = small_config(w, 3);
  with_initial.score_initial_window = true;
  const auto all = run_stream(stream, with_initial);
  REQUIRE(all.size() == 2 * w);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].point_index == i);
}

TEST_CASE("stream order matters") {
  auto stream = gaussian_stream(200, 3, 21);
  const auto a = run_stream(stream, small_config(50, 5));
  std::mt19937_64 rng(1);
  std::shuffle(stream.begin(), stream.end(), rng);
  const auto b = run_stream(stream, small_config(50, 5));
  REQUIRE(a.size() == b.size());
  int differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += a[i].score != b[i].score;
  CHECK(differ > 0);
}

TEST_CASE("bad points are rejected and counted, not buffered") {
  const auto stream = gaussian_stream(10, 3, 1);
  auto engine = StreamEngine::bootstrap(std::span(stream).first(8), small_config(8, 2));
  CHECK_FALSE(engine.process_point({100, Eigen::Vector2d(1, 2)}).has_value());
  Eigen::Vector3d nan(1.0, std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_FALSE(engine.process_point({101, nan}).has_value());
  CHECK(engine.rejected() == 2);
  CHECK(engine.window().count() == 0);
  CHECK(engine.points_seen() == 8);
  CHECK(engine.process_point(stream[8]).has_value());
  CHECK(engine.window().count() == 1);
}

TEST_CASE("cluster points stay below the threshold, far outliers go above") {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    // Cluster spread 0.05 (tight against the unit bin width), outlier at 100x.
    const auto stream = gaussian_stream(128, 6, seed, 0.05);
    auto engine = StreamEngine::bootstrap(stream, small_config(128, 60, seed));
    const auto inlier = engine.process_point({128, stream[5].values});
    const auto outlier = engine.process_point({129, Eigen::VectorXd::Constant(6, 5.0)});
    good += !inlier->is_anomaly && outlier->is_anomaly;
  }
  CHECK(good >= 95);
}

TEST_CASE("rebuilding adapts to a distribution shift") {
  // Normal points after a mean shift score lower under the model rebuilt on
  // the shifted block than under the model from before the shift.
  int adapted = 0;
  const std::size_t w = 128;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto spec = default_synth_spec(4, 4 * w, 0.0, seed);
    spec.drift_at = 2 * w;
    spec.drift_shift = Eigen::VectorXd::Constant(4, 6.0);
    const auto data = synth_stream(spec).values;
    const auto cfg = small_config(w, 30, seed);
    const auto before = build_forest(data.middleCols(w, w), cfg.num_trees, seed, cfg.build_options());
    const auto after = build_forest(data.middleCols(2 * w, w), cfg.num_trees, seed + 1, cfg.build_options());
    double s_before = 0.0, s_after = 0.0;
    for (Eigen::Index j = 3 * w; j < 4 * w; ++j) {
      s_before += anomaly_score(data.col(j), before);
      s_after += anomaly_score(data.col(j), after);
    }
    adapted += s_after < s_before;
  }
  CHECK(adapted == 30);
}
