#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "dlshif/lsh.hpp"
#include "test_helpers.hpp"

using namespace dlshif;

namespace {

// Collision probability of two points at distance c under one 2-stable
// hash of bin width w: integral over t in [0, w] of (1/c) f(t/c) (1 - t/w),
// f the density of |N(0,1)|. Composite Simpson rule.
double collision_probability(double c, double w) {
  const int n = 20000;
  const double h = w / n;
  auto integrand = [&](double t) {
    const double z = t / c;
    const double density = 2.0 * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return density / c * (1.0 - t / w);
  };
  double sum = integrand(0.0) + integrand(w);
  for (int i = 1; i < n; ++i) sum += integrand(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

bool same_function(const L2HashFunction& a, const L2HashFunction& b) {
  return a.projection == b.projection && a.offset == b.offset && a.width == b.width;
}

}  // namespace

TEST_CASE("make_family is deterministic in (seed, index)") {
  const auto a = make_family(6, 42);
  const auto b = make_family(6, 42);
  for (std::size_t i = 0; i < 64; ++i) CHECK(same_function(a.function(i), b.function(i)));

  auto cached = make_family(6, 42);
  cached.materialize(10);
  for (std::size_t i = 0; i < 20; ++i) CHECK(same_function(cached.function(i), a.function(i)));
  CHECK(same_function(cached[3], a.function(3)));
}

TEST_CASE("distinct seeds and indices give distinct functions") {
  const auto a = make_family(3, 1);
  const auto b = make_family(3, 2);
  CHECK(a.function(0).projection != b.function(0).projection);
  CHECK(a.function(0).projection != a.function(1).projection);
}

TEST_CASE("make_family rejects zero dimensionality and bad widths") {
  CHECK_THROWS_AS(make_family(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_family(2, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_family(2, 1, -1.0), std::invalid_argument);
}

TEST_CASE("projection coordinates are standard normal, offsets uniform on [0, width)") {
  const auto family = make_family(2, 7);
  const int functions = 50000;  // 10^5 coordinates
  double sum = 0.0, sq = 0.0, offset_sum = 0.0;
  for (int i = 0; i < functions; ++i) {
    const auto f = family.function(static_cast<std::size_t>(i));
    CHECK(f.offset >= 0.0);
    CHECK(f.offset < f.width);
    for (Eigen::Index c = 0; c < 2; ++c) {
      sum += f.projection[c];
      sq += f.projection[c] * f.projection[c];
    }
    offset_sum += f.offset;
  }
  const double n = 2.0 * functions;
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) <= 0.02);
  CHECK(std::abs(var - 1.0) <= 0.05);
  CHECK(std::abs(offset_sum / functions - 0.5) <= 0.01);
}

TEST_CASE("hash_point evaluates floor((a.x + b) / w)") {
  L2HashFunction f{Eigen::Vector2d(1.0, 0.0), 0.0, 1.0};
  CHECK(hash_point(f, Eigen::Vector2d(0.0, 0.0)) == HashKey{0});
  CHECK(hash_point(f, Eigen::Vector2d(2.5, 9.0)) == HashKey{2});
  CHECK(hash_point(f, Eigen::Vector2d(-0.5, 3.0)) == HashKey{-1});

  L2HashFunction g{Eigen::Vector2d(1.0, 1.0), 0.25, 0.5};
  // (1 + 2 + 0.25) / 0.5 = 6.5
  CHECK(hash_point(g, Eigen::Vector2d(1.0, 2.0)) == HashKey{6});

  CHECK_THROWS_AS(hash_point(f, Eigen::Vector3d(1.0, 2.0, 3.0)), std::invalid_argument);
}

TEST_CASE("identical points get identical keys under every function") {
  const auto family = make_family(4, 3);
  const Eigen::Vector4d x(0.3, -1.2, 4.0, 0.0);
  const Eigen::Vector4d y = x;
  for (std::size_t i = 0; i < 200; ++i)
    CHECK(hash_point(family.function(i), x) == hash_point(family.function(i), y));
}

TEST_CASE("hash_columns agrees with hash_point") {
  std::mt19937_64 rng(11);
  const auto pts = testing::random_points(5, 100, rng, 3.0);
  const auto f = make_family(5, 9).function(4);
  const auto keys = hash_columns(f, pts);
  for (Eigen::Index j = 0; j < pts.cols(); ++j)
    CHECK(keys[static_cast<std::size_t>(j)] == hash_point(f, pts.col(j)));
}

TEST_CASE("lsh_split on identical points yields a single bucket") {
  PointMatrix pts = Eigen::Vector3d(1.0, 2.0, 3.0).replicate(1, 4);
  const auto parts = lsh_split(pts, make_family(3, 5).function(0));
  REQUIRE(parts.size() == 1);
  CHECK(parts.begin()->second.size() == 4);
}

TEST_CASE("lsh_split of nothing is empty") {
  PointMatrix pts(3, 0);
  CHECK(lsh_split(pts, make_family(3, 5).function(0)).empty());
  CHECK(lsh_split(PointMatrix(3, 4), {}, make_family(3, 5).function(0)).empty());
}

TEST_CASE("lsh_split is a partition (property)") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> dim(1, 8), count(1, 300);
    const auto pts = testing::random_points(dim(rng), count(rng), rng, 2.0);
    const auto f = make_family(pts.rows(), rng()).function(trial);
    const auto parts = lsh_split(pts, f);
    std::set<Eigen::Index> seen;
    std::size_t total = 0;
    for (const auto& [key, members] : parts) {
      CHECK_FALSE(members.empty());
      for (auto j : members) {
        CHECK(hash_point(f, pts.col(j)) == key);
        seen.insert(j);
      }
      total += members.size();
    }
    CHECK(total == static_cast<std::size_t>(pts.cols()));
    CHECK(seen.size() == total);
  }
}

TEST_CASE("far-apart clusters land in different buckets") {
  // Cluster centers 100 bin widths apart along the first axis.
  const double width = 1.0;
  const Eigen::Vector3d a(0.0, 0.0, 0.0);
  const Eigen::Vector3d b(100.0 * width, 0.0, 0.0);
  const auto family = make_family(3, 99, width);
  int separated = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto f = family.function(i);
    if (hash_point(f, a) != hash_point(f, b)) ++separated;
  }
  CHECK(separated >= 990);
}

TEST_CASE("collision rate matches the 2-stable collision probability") {
  const auto family = make_family(4, 1234, 1.0);
  const Eigen::Vector4d origin = Eigen::Vector4d::Zero();
  const Eigen::Vector4d dir = Eigen::Vector4d(1.0, -2.0, 0.5, 3.0).normalized();
  const int n = 10000;
  for (double distance : {0.1, 0.5, 1.0, 3.0}) {
    int collide = 0;
    for (int i = 0; i < n; ++i) {
      const auto f = family.function(static_cast<std::size_t>(i));
      collide += hash_point(f, origin) == hash_point(f, origin + distance * dir);
    }
    const double p = collision_probability(distance, 1.0);
    const double sigma = std::sqrt(p * (1.0 - p) / n);
    INFO("distance " << distance << " expected " << p << " observed " << double(collide) / n);
    CHECK(std::abs(double(collide) / n - p) <= 4.0 * sigma + 1e-12);
  }
}
