#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "oclust/linalg.h"

namespace testing {

inline oclust::Vec gaussian_vec(std::size_t dim, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  oclust::Vec v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

inline oclust::Vec unit_vec(std::size_t dim, std::mt19937_64& rng) {
  return oclust::normalized(gaussian_vec(dim, rng));
}

// Embeddings near `k` random directions; labels follow a random sequence.
struct Blobs {
  std::vector<oclust::Vec> points;
  std::vector<int> labels;
};

inline Blobs blobs(std::size_t n, int k, std::size_t dim, double noise, std::mt19937_64& rng) {
  std::vector<oclust::Vec> centers;
  for (int c = 0; c < k; ++c) centers.push_back(unit_vec(dim, rng));
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::normal_distribution<double> nd(0.0, noise);
  Blobs b;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = pick(rng);
    oclust::Vec p = centers[c];
    for (auto& x : p) x += nd(rng);
    b.points.push_back(p);
    b.labels.push_back(c);
  }
  return b;
}

// Rescaled cosine distance written out from its definition.
inline double plain_distance(const oclust::Vec& a, const oclust::Vec& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return (1.0 - ab / std::sqrt(aa * bb)) / 2.0;
}

// All canonical labelings (restricted growth strings) of length n.
inline void canonical_labelings(std::size_t n, std::vector<std::vector<int>>& out,
                                std::size_t max_labels = 1000) {
  std::vector<int> cur;
  auto rec = [&](auto&& self, int used) -> void {
    if (cur.size() == n) {
      out.push_back(cur);
      return;
    }
    for (int l = 0; l <= used && static_cast<std::size_t>(l) < max_labels; ++l) {
      cur.push_back(l);
      self(self, std::max(used, l + 1));
      cur.pop_back();
    }
  };
  rec(rec, 0);
}

}  // namespace testing
