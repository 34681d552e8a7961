#pragma once

#include <cstddef>
#include <vector>

#include "oclust/linalg.h"

namespace oclust {

// Rows are ground-truth speakers, columns are predicted clusters. Labels on
// both sides are non-negative integers; row i holds speaker id i and
// column j holds cluster id j (ids absent from the input give zero rows or
// columns).
struct WeightMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

// W(i, j) = |G_i ∩ Y_j| / |G_i ∪ Y_j| * |Y_j|.
WeightMatrix build_weights(const std::vector<int>& assignments,
                           const std::vector<int>& truths);

// Raw co-occurrence counts |G_i ∩ Y_j|, used for frame error and DER mapping.
WeightMatrix build_overlap_counts(const std::vector<int>& assignments,
                                  const std::vector<int>& truths);

struct Matching {
  std::vector<int> row_to_col;  // -1 when the row is unmatched
  std::vector<int> col_to_row;  // -1 when the column is unmatched
  double total_weight = 0.0;
};

// Maximum-weight one-to-one matching (Kuhn-Munkres on the zero-padded
// square matrix). Pairs carrying zero weight are reported as unmatched.
Matching max_weight_matching(const WeightMatrix& w);

struct LabeledEmbedding {
  std::size_t index = 0;
  int true_cluster = -1;   // cluster matched to the embedding's speaker
  int false_cluster = -1;  // assigned cluster; only set for negatives
  Vec mu_true;
  Vec mu_false;  // empty for positives
};

struct PosNegLabeling {
  std::vector<LabeledEmbedding> pos;
  std::vector<LabeledEmbedding> neg;
  std::size_t skipped = 0;  // speaker had no matched cluster
};

// centers[j] is the center of cluster j.
PosNegLabeling label_pos_neg(const std::vector<int>& assignments,
                             const std::vector<int>& truths,
                             const Matching& matching,
                             const std::vector<Vec>& centers);

// Mean of the member embeddings for each cluster id in 0..max(assignments).
std::vector<Vec> cluster_centers(const std::vector<Vec>& embeddings,
                                 const std::vector<int>& assignments);

}  // namespace oclust
