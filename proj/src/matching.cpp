#include "oclust/matching.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oclust {

namespace {

std::size_t label_span(const std::vector<int>& labels) {
  int hi = -1;
  for (int v : labels) {
    if (v < 0) throw std::invalid_argument("labels must be non-negative");
    hi = std::max(hi, v);
  }
  return static_cast<std::size_t>(hi + 1);
}

void check_pair(const std::vector<int>& assignments, const std::vector<int>& truths) {
  if (assignments.empty() || truths.empty()) throw std::invalid_argument("empty labeling");
  if (assignments.size() != truths.size()) {
    throw std::invalid_argument("assignment and truth sequences differ in length");
  }
}

}  // namespace

WeightMatrix build_overlap_counts(const std::vector<int>& assignments,
                                  const std::vector<int>& truths) {
  check_pair(assignments, truths);
  WeightMatrix w;
  w.rows = label_span(truths);
  w.cols = label_span(assignments);
  w.values.assign(w.rows * w.cols, 0.0);
  for (std::size_t n = 0; n < truths.size(); ++n) w(truths[n], assignments[n]) += 1.0;
  return w;
}

WeightMatrix build_weights(const std::vector<int>& assignments,
                           const std::vector<int>& truths) {
  WeightMatrix w = build_overlap_counts(assignments, truths);
  std::vector<double> row_size(w.rows, 0.0), col_size(w.cols, 0.0);
  for (std::size_t i = 0; i < w.rows; ++i) {
    for (std::size_t j = 0; j < w.cols; ++j) {
      row_size[i] += w(i, j);
      col_size[j] += w(i, j);
    }
  }
  for (std::size_t i = 0; i < w.rows; ++i) {
    for (std::size_t j = 0; j < w.cols; ++j) {
      const double inter = w(i, j);
      const double uni = row_size[i] + col_size[j] - inter;
      w(i, j) = uni > 0.0 ? inter / uni * col_size[j] : 0.0;
    }
  }
  return w;
}

Matching max_weight_matching(const WeightMatrix& w) {
  if (w.values.size() != w.rows * w.cols) throw std::invalid_argument("malformed weight matrix");
  Matching m;
  m.row_to_col.assign(w.rows, -1);
  m.col_to_row.assign(w.cols, -1);
  const std::size_t n = std::max(w.rows, w.cols);
  if (n == 0) return m;

  double max_w = 0.0;
  for (double v : w.values) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("weights must be finite and non-negative");
    max_w = std::max(max_w, v);
  }
  auto cost = [&](std::size_t i, std::size_t j) {
    const double v = (i < w.rows && j < w.cols) ? w(i, j) : 0.0;
    return max_w - v;
  };

  // Shortest augmenting path formulation with potentials, 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j] - 1;
    const std::size_t col = j - 1;
    if (i >= w.rows || col >= w.cols) continue;
    if (!(w(i, col) > 0.0)) continue;
    m.row_to_col[i] = static_cast<int>(col);
    m.col_to_row[col] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < w.rows; ++i) {
    if (m.row_to_col[i] >= 0) m.total_weight += w(i, m.row_to_col[i]);
  }
  return m;
}

PosNegLabeling label_pos_neg(const std::vector<int>& assignments,
                             const std::vector<int>& truths,
                             const Matching& matching,
                             const std::vector<Vec>& centers) {
  check_pair(assignments, truths);
  PosNegLabeling out;
  for (std::size_t n = 0; n < assignments.size(); ++n) {
    const int speaker = truths[n];
    const int matched = speaker < static_cast<int>(matching.row_to_col.size())
                            ? matching.row_to_col[speaker]
                            : -1;
    if (matched < 0) {
      ++out.skipped;
      continue;
    }
    LabeledEmbedding le;
    le.index = n;
    le.true_cluster = matched;
    le.mu_true = centers.at(matched);
    if (assignments[n] == matched) {
      out.pos.push_back(std::move(le));
    } else {
      le.false_cluster = assignments[n];
      le.mu_false = centers.at(assignments[n]);
      out.neg.push_back(std::move(le));
    }
  }
  return out;
}

std::vector<Vec> cluster_centers(const std::vector<Vec>& embeddings,
                                 const std::vector<int>& assignments) {
  if (embeddings.size() != assignments.size()) {
    throw std::invalid_argument("embedding and assignment counts differ");
  }
  std::vector<Vec> centers(label_span(assignments));
  std::vector<std::size_t> counts(centers.size(), 0);
  for (std::size_t n = 0; n < embeddings.size(); ++n) {
    centroid_add_inplace(centers[assignments[n]], counts[assignments[n]], embeddings[n]);
  }
  return centers;
}

}  // namespace oclust
