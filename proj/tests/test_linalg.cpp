#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oclust/linalg.h"
#include "support.h"

using namespace oclust;

TEST_CASE("cosine distance basic cases") {
  const Vec v{0.3, -1.2, 2.0};
  CHECK(cosine_distance(v, v) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(cosine_distance(Vec{1, 0}, Vec{-1, 0}) == doctest::Approx(1.0));
  CHECK(cosine_distance(Vec{1, 0}, Vec{0, 1}) == doctest::Approx(0.5));
}

TEST_CASE("cosine distance errors") {
  CHECK_THROWS_WITH_AS(cosine_distance(Vec{0, 0}, Vec{1, 0}), "degenerate vector",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cosine_distance(Vec{1, 0}, Vec{0, 0}), "degenerate vector",
                       std::invalid_argument);
  CHECK_THROWS_AS(cosine_distance(Vec{1, 0}, Vec{1, 0, 0}), std::invalid_argument);
}

TEST_CASE("raw distance is clamped") {
  CHECK(cosine_distance(Vec{1, 0}, Vec{1, 0}, DistanceKind::kRaw) == kRawDistanceClamp);
  CHECK(cosine_distance(Vec{1, 0}, Vec{-1, 0}, DistanceKind::kRaw) == 1.0 - kRawDistanceClamp);
  CHECK(cosine_distance(Vec{1, 0}, Vec{0, 1}, DistanceKind::kRaw) == doctest::Approx(1.0));
}

TEST_CASE("distance is scale invariant, symmetric and bounded") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec a = testing::gaussian_vec(7, rng);
    const Vec b = testing::gaussian_vec(7, rng);
    const double d = cosine_distance(a, b);
    Vec sa = a, tb = b;
    const double s = scale(rng), t = scale(rng);
    for (auto& x : sa) x *= s;
    for (auto& x : tb) x *= t;
    CHECK(cosine_distance(sa, tb) == doctest::Approx(d).epsilon(1e-12));
    CHECK(cosine_distance(b, a) == doctest::Approx(d).epsilon(1e-15));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(d == doctest::Approx(testing::plain_distance(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("centroid_add examples") {
  auto [c1, n1] = centroid_add(Vec{0, 0}, 0, Vec{1, 0});
  CHECK(c1 == Vec{1, 0});
  CHECK(n1 == 1);
  auto [c2, n2] = centroid_add(Vec{1, 0}, 1, Vec{0, 1});
  CHECK(c2 == Vec{0.5, 0.5});
  CHECK(n2 == 2);
  // count 0 ignores whatever center is passed
  auto [c3, n3] = centroid_add(Vec{9, 9}, 0, Vec{2, 3});
  CHECK(c3 == Vec{2, 3});
  CHECK(n3 == 1);
  CHECK_THROWS_AS(centroid_add(Vec{1, 0}, 1, Vec{1, 0, 0}), std::invalid_argument);
}

TEST_CASE("five unit vectors: incremental mean equals batch mean") {
  std::mt19937_64 rng(5);
  Vec center;
  std::size_t count = 0;
  Vec sum(4, 0.0);
  for (int i = 0; i < 5; ++i) {
    const Vec e = testing::unit_vec(4, rng);
    std::tie(center, count) = centroid_add(center, count, e);
    for (int k = 0; k < 4; ++k) sum[k] += e[k];
  }
  CHECK(count == 5);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(center[k] - sum[k] / 5.0) < 1e-12);
}

TEST_CASE("incremental mean tracks batch mean over 10^4 insertions") {
  std::mt19937_64 rng(99);
  Vec center;
  std::size_t count = 0;
  std::vector<long double> sum(6, 0.0L);
  for (int i = 0; i < 10000; ++i) {
    const Vec e = testing::gaussian_vec(6, rng, 3.0);
    centroid_add_inplace(center, count, e);
    for (int k = 0; k < 6; ++k) sum[k] += e[k];
  }
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(center[k] - static_cast<double>(sum[k] / 10000.0L)) < 1e-10);
  }
}

TEST_CASE("centroid is not renormalized") {
  auto [c, n] = centroid_add(Vec{1, 0}, 1, Vec{0, 1});
  CHECK(norm(c) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("normalized and norm") {
  const Vec u = normalized(Vec{3, 4});
  CHECK(u[0] == doctest::Approx(0.6));
  CHECK(u[1] == doctest::Approx(0.8));
  CHECK(norm(Vec{3, 4}) == doctest::Approx(5.0));
  CHECK(dot(Vec{1, 2}, Vec{3, 4}) == doctest::Approx(11.0));
  CHECK_THROWS_AS(normalized(Vec{0, 0}), std::invalid_argument);
}
