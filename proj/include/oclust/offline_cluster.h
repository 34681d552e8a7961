#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oclust/linalg.h"

namespace oclust {

// Average-linkage agglomerative clustering under cosine distance. Exactly
// one stop rule must be set: merging stops once the closest pair is at least
// distance_threshold apart, or once target_clusters remain.
struct AhcConfig {
  std::optional<double> distance_threshold;
  std::optional<std::size_t> target_clusters;
  DistanceKind distance = DistanceKind::kRescaled;

  static AhcConfig with_threshold(double t, DistanceKind kind = DistanceKind::kRescaled) {
    return AhcConfig{t, std::nullopt, kind};
  }
  static AhcConfig with_target(std::size_t k, DistanceKind kind = DistanceKind::kRescaled) {
    return AhcConfig{std::nullopt, k, kind};
  }
};

struct AhcMerge {
  std::size_t a = 0;  // cluster ids: 0..n-1 are leaves, n+k is the k-th merge
  std::size_t b = 0;
  double distance = 0.0;
};

struct AhcResult {
  std::vector<int> labels;  // dense, first-appearance order
  std::vector<AhcMerge> merges;
};

// Ties on linkage distance go to the lowest (row, column) pair of active
// cluster ids.
AhcResult ahc(const std::vector<Vec>& embeddings, const AhcConfig& config);

struct EigenResult {
  Vec values;                  // ascending
  std::vector<double> vectors;  // n x n row-major, column k pairs with values[k]
  int sweeps = 0;
};

// Cyclic Jacobi rotations for a symmetric n x n matrix (row-major). Throws
// std::runtime_error if off-diagonal mass does not vanish within max_sweeps.
EigenResult jacobi_eigen(std::vector<double> matrix, std::size_t n, int max_sweeps = 100,
                         double tolerance = 1e-12);

// Lloyd's k-means with k-means++ seeding; returns dense labels.
std::vector<int> kmeans(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed,
                        int max_iters = 100);

// Normalized spectral clustering on the cosine affinity 1 - d(x_i, x_j).
std::vector<int> spectral(const std::vector<Vec>& embeddings, std::size_t k,
                          std::uint64_t seed = 0);

}  // namespace oclust
