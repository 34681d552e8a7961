#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "oclust/matching.h"
#include "support.h"

using namespace oclust;

namespace {

// Best total over all injective maps from the smaller side into the larger.
double brute_force(const WeightMatrix& w) {
  const bool rows_small = w.rows <= w.cols;
  const std::size_t small = rows_small ? w.rows : w.cols;
  const std::size_t large = rows_small ? w.cols : w.rows;
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < small; ++i) s += rows_small ? w(i, perm[i]) : w(perm[i], i);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

WeightMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  WeightMatrix w{r, c, std::vector<double>(r * c)};
  for (auto& x : w.values) x = u(rng);
  return w;
}

void check_one_to_one(const Matching& m, const WeightMatrix& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < m.row_to_col.size(); ++i) {
    const int j = m.row_to_col[i];
    if (j < 0) continue;
    CHECK(m.col_to_row[j] == static_cast<int>(i));
    total += w(i, j);
  }
  CHECK(total == doctest::Approx(m.total_weight).epsilon(1e-12));
}

}  // namespace

TEST_CASE("build_weights examples") {
  const WeightMatrix a = build_weights({0, 0, 1, 1}, {0, 0, 1, 1});
  CHECK(a.rows == 2);
  CHECK(a.cols == 2);
  CHECK(a.values == std::vector<double>{2, 0, 0, 2});

  const WeightMatrix b = build_weights({0, 0, 0, 0}, {0, 0, 1, 1});
  CHECK(b.rows == 2);
  CHECK(b.cols == 1);
  CHECK(b(0, 0) == doctest::Approx(2.0));
  CHECK(b(1, 0) == doctest::Approx(2.0));

  // G_a = {0}, G_b = {1, 2}, Y_0 = {0, 1}, Y_1 = {2}
  //   W(a,0) = (1/2)*2, W(b,0) = (1/3)*2, W(b,1) = (1/2)*1
  const WeightMatrix c = build_weights({0, 0, 1}, {0, 1, 1});
  CHECK(c(0, 0) == doctest::Approx(1.0));
  CHECK(c(0, 1) == 0.0);
  CHECK(c(1, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(c(1, 1) == doctest::Approx(0.5));

  CHECK_THROWS_AS(build_weights({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_weights({0, 1}, {0}), std::invalid_argument);
}

TEST_CASE("matching examples") {
  const Matching m = max_weight_matching(WeightMatrix{2, 2, {2, 0, 0, 2}});
  CHECK(m.row_to_col == std::vector<int>{0, 1});
  CHECK(m.total_weight == 4.0);

  const Matching s = max_weight_matching(WeightMatrix{1, 1, {1}});
  CHECK(s.row_to_col == std::vector<int>{0});
  CHECK(s.col_to_row == std::vector<int>{0});
}

TEST_CASE("rectangular matrices leave the surplus side unmatched") {
  const Matching tall = max_weight_matching(WeightMatrix{3, 1, {1, 5, 2}});
  CHECK(tall.row_to_col == std::vector<int>{-1, 0, -1});
  CHECK(tall.total_weight == 5.0);
  const Matching wide = max_weight_matching(WeightMatrix{1, 3, {1, 5, 2}});
  CHECK(wide.row_to_col == std::vector<int>{1});
  CHECK(wide.col_to_row == std::vector<int>{-1, 0, -1});
}

TEST_CASE("zero-weight pairs are unmatched") {
  const Matching m = max_weight_matching(WeightMatrix{2, 2, {3, 0, 0, 0}});
  CHECK(m.row_to_col == std::vector<int>{0, -1});
  CHECK(m.col_to_row == std::vector<int>{0, -1});
}

TEST_CASE("ties resolve deterministically to the lowest indices") {
  const Matching m = max_weight_matching(WeightMatrix{2, 2, {1, 1, 1, 1}});
  CHECK(m.row_to_col == std::vector<int>{0, 1});
  const Matching again = max_weight_matching(WeightMatrix{2, 2, {1, 1, 1, 1}});
  CHECK(again.row_to_col == m.row_to_col);
}

TEST_CASE("random 6x6 matches all 720 permutations") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const WeightMatrix w = random_matrix(6, 6, rng);
    const Matching m = max_weight_matching(w);
    CHECK(m.total_weight == doctest::Approx(brute_force(w)).epsilon(1e-12));
    check_one_to_one(m, w);
  }
}

TEST_CASE("rectangular matrices up to 7 match brute force") {
  std::mt19937_64 rng(7);
  for (std::size_t r = 1; r <= 7; ++r) {
    for (std::size_t c = 1; c <= 7; ++c) {
      const WeightMatrix w = random_matrix(r, c, rng);
      const Matching m = max_weight_matching(w);
      CHECK(m.total_weight == doctest::Approx(brute_force(w)).epsilon(1e-12));
      check_one_to_one(m, w);
    }
  }
}

TEST_CASE("permuting cluster ids permutes the matching") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> assign(30), truth(30);
    for (auto& a : assign) a = lab(rng);
    for (auto& t : truth) t = lab(rng);
    std::vector<int> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> permuted(assign.size());
    for (std::size_t i = 0; i < assign.size(); ++i) permuted[i] = perm[assign[i]];

    const auto w1 = build_weights(assign, truth);
    const auto w2 = build_weights(permuted, truth);
    const Matching m1 = max_weight_matching(w1);
    const Matching m2 = max_weight_matching(w2);
    CHECK(m1.total_weight == doctest::Approx(m2.total_weight).epsilon(1e-12));

    // pos/neg partition sizes do not depend on the ids
    std::vector<Vec> pts;
    for (std::size_t i = 0; i < assign.size(); ++i) pts.push_back(testing::gaussian_vec(3, rng));
    const auto l1 = label_pos_neg(assign, truth, m1, cluster_centers(pts, assign));
    const auto l2 = label_pos_neg(permuted, truth, m2, cluster_centers(pts, permuted));
    CHECK(l1.pos.size() + l1.neg.size() + l1.skipped == assign.size());
    CHECK(l2.pos.size() + l2.neg.size() + l2.skipped == assign.size());
    // The optimum may not be unique; when it is, the partitions match exactly.
    bool unique = true;
    for (std::size_t i = 0; i < m1.row_to_col.size(); ++i) {
      const int j1 = m1.row_to_col[i];
      const int j2 = m2.row_to_col[i];
      if ((j1 < 0) != (j2 < 0) || (j1 >= 0 && perm[j1] != j2)) unique = false;
    }
    if (unique) {
      CHECK(l1.pos.size() == l2.pos.size());
      CHECK(l1.neg.size() == l2.neg.size());
    }
  }
}

TEST_CASE("perfect clustering has no negatives") {
  const std::vector<int> assign{1, 1, 0, 0, 2};
  const std::vector<int> truth{0, 0, 1, 1, 2};
  const std::vector<Vec> pts{{1, 0}, {1, 0.1}, {0, 1}, {0.1, 1}, {-1, 0}};
  const Matching m = max_weight_matching(build_weights(assign, truth));
  const PosNegLabeling l = label_pos_neg(assign, truth, m, cluster_centers(pts, assign));
  CHECK(l.neg.empty());
  CHECK(l.skipped == 0);
  CHECK(l.pos.size() == 5);
}

TEST_CASE("hand-traced negative") {
  const std::vector<int> assign{0, 0, 1, 1};
  const std::vector<int> truth{0, 0, 0, 1};
  const std::vector<Vec> pts{{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  const Matching m = max_weight_matching(build_weights(assign, truth));
  REQUIRE(m.row_to_col == std::vector<int>{0, 1});
  const auto centers = cluster_centers(pts, assign);
  CHECK(centers[0] == Vec{1, 0.5});
  CHECK(centers[1] == Vec{-0.5, 1});
  const PosNegLabeling l = label_pos_neg(assign, truth, m, centers);
  REQUIRE(l.neg.size() == 1);
  CHECK(l.neg[0].index == 2);
  CHECK(l.neg[0].mu_false == centers[1]);
  CHECK(l.neg[0].mu_true == centers[0]);
  CHECK(l.pos.size() == 3);
}

TEST_CASE("members of an unmatched speaker are skipped") {
  const std::vector<int> assign{0, 0, 1, 1, 1, 1};
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  const std::vector<Vec> pts(6, Vec{1, 0});
  const Matching m = max_weight_matching(build_weights(assign, truth));
  const PosNegLabeling l = label_pos_neg(assign, truth, m, cluster_centers(pts, assign));
  CHECK(l.skipped == 2);
  CHECK(l.pos.size() + l.neg.size() == 4);
  const int unmatched = m.row_to_col[1] < 0 ? 1 : 2;
  for (const auto& p : l.pos) CHECK(truth[p.index] != unmatched);
  for (const auto& n : l.neg) CHECK(truth[n.index] != unmatched);
}
