#include "oclust/offline_cluster.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "oclust/stream.h"

namespace oclust {

AhcResult ahc(const std::vector<Vec>& embeddings, const AhcConfig& config) {
  if (config.distance_threshold.has_value() == config.target_clusters.has_value()) {
    throw std::invalid_argument("AHC needs exactly one stop rule");
  }
  const std::size_t n = embeddings.size();
  AhcResult result;
  if (n == 0) return result;

  // Lance-Williams update for average linkage on a dense matrix.
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = cosine_distance(embeddings[i], embeddings[j], config.distance);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  }
  std::vector<std::size_t> size(n, 1), node_id(n);
  std::vector<char> active(n, 1);
  std::vector<std::size_t> member_root(n);
  for (std::size_t i = 0; i < n; ++i) node_id[i] = i, member_root[i] = i;

  std::size_t clusters = n;
  const std::size_t target = config.target_clusters.value_or(1);
  while (clusters > std::max<std::size_t>(target, 1)) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (dist[i * n + j] < best) {
          best = dist[i * n + j];
          bi = i;
          bj = j;
        }
      }
    }
    if (config.distance_threshold && best >= *config.distance_threshold) break;

    result.merges.push_back({node_id[bi], node_id[bj], best});
    const double si = static_cast<double>(size[bi]);
    const double sj = static_cast<double>(size[bj]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double d = (si * dist[bi * n + k] + sj * dist[bj * n + k]) / (si + sj);
      dist[bi * n + k] = d;
      dist[k * n + bi] = d;
    }
    size[bi] += size[bj];
    active[bj] = 0;
    node_id[bi] = n + result.merges.size() - 1;
    for (std::size_t m = 0; m < n; ++m) {
      if (member_root[m] == bj) member_root[m] = bi;
    }
    --clusters;
  }

  std::vector<int> raw(n);
  for (std::size_t m = 0; m < n; ++m) raw[m] = static_cast<int>(member_root[m]);
  result.labels = canonicalize(raw);
  return result;
}

EigenResult jacobi_eigen(std::vector<double> a, std::size_t n, int max_sweeps,
                         double tolerance) {
  if (a.size() != n * n) throw std::invalid_argument("matrix size mismatch");
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto off_norm = [&]() {
    double s = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        total += a[i * n + j] * a[i * n + j];
        if (i != j) s += a[i * n + j] * a[i * n + j];
      }
    }
    return std::pair{std::sqrt(s), std::sqrt(total)};
  };

  EigenResult out;
  bool converged = n < 2;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    auto [off, total] = off_norm();
    if (off <= tolerance * std::max(total, 1e-300)) {
      converged = true;
      break;
    }
    out.sweeps = sweep + 1;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    auto [off, total] = off_norm();
    if (off > tolerance * std::max(total, 1e-300)) {
      throw std::runtime_error("Jacobi eigensolver did not converge");
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] < a[y * n + y]; });
  out.values.resize(n);
  out.vectors.assign(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a[order[k] * n + order[k]];
    for (std::size_t r = 0; r < n; ++r) out.vectors[r * n + k] = v[r * n + order[k]];
  }
  return out;
}

namespace {

double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

std::vector<int> kmeans(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed,
                        int max_iters) {
  const std::size_t n = points.size();
  if (k == 0 || k > n) throw std::invalid_argument("k must lie in [1, n]");
  std::mt19937_64 rng(seed);

  std::vector<Vec> centers;
  centers.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick + 1 < n; ++pick) {
        if (r < d2[pick]) break;
        r -= d2[pick];
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;
    }
    centers.push_back(points[pick]);
  }

  std::vector<int> labels(n, -1);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Vec> sums(k, Vec(points[0].size(), 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < points[i].size(); ++d) sums[labels[i]][d] += points[i][d];
      ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its old center
      for (double& x : sums[c]) x /= static_cast<double>(counts[c]);
      centers[c] = std::move(sums[c]);
    }
  }
  return canonicalize(labels);
}

std::vector<int> spectral(const std::vector<Vec>& embeddings, std::size_t k,
                          std::uint64_t seed) {
  const std::size_t n = embeddings.size();
  if (k == 0 || k > n) throw std::invalid_argument("k must lie in [1, n]");
  if (k == n) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i);
    return labels;
  }

  std::vector<double> aff(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 1.0 - cosine_distance(embeddings[i], embeddings[j]);
      aff[i * n + j] = s;
      aff[j * n + i] = s;
    }
  }
  Vec deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) deg[i] += aff[i * n + j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double denom = std::sqrt(deg[i] * deg[j]);
      aff[i * n + j] = denom > 0.0 ? aff[i * n + j] / denom : 0.0;
    }
  }
  const EigenResult eig = jacobi_eigen(std::move(aff), n);

  // Rows of the top-k eigenvectors, each normalized to unit length.
  std::vector<Vec> rows(n, Vec(k));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) rows[i][c] = eig.vectors[i * n + (n - 1 - c)];
    const double r = norm(rows[i]);
    if (r > 0.0) {
      for (double& x : rows[i]) x /= r;
    }
  }
  return kmeans(rows, k, seed);
}

}  // namespace oclust
