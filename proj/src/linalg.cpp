#include "oclust/linalg.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace oclust {

namespace {

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a) +
                                " vs " + std::to_string(b));
  }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  check_dims(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_distance(std::span<const double> a, std::span<const double> b,
                       DistanceKind kind) {
  check_dims(a.size(), b.size());
  const double na = norm(a);
  const double nb = norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw std::invalid_argument("degenerate vector");
  const double cos = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  if (kind == DistanceKind::kRescaled) return (1.0 - cos) * 0.5;
  return std::clamp(1.0 - cos, kRawDistanceClamp, 1.0 - kRawDistanceClamp);
}

std::pair<Vec, std::size_t> centroid_add(std::span<const double> center,
                                         std::size_t count,
                                         std::span<const double> e) {
  Vec c(center.begin(), center.end());
  if (count == 0) c.assign(e.size(), 0.0);
  centroid_add_inplace(c, count, e);
  return {std::move(c), count};
}

void centroid_add_inplace(Vec& center, std::size_t& count,
                          std::span<const double> e) {
  if (count == 0) {
    center.assign(e.begin(), e.end());
    count = 1;
    return;
  }
  check_dims(center.size(), e.size());
  const double n = static_cast<double>(count + 1);
  for (std::size_t i = 0; i < center.size(); ++i) {
    center[i] += (e[i] - center[i]) / n;
  }
  ++count;
}

Vec normalized(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw std::invalid_argument("degenerate vector");
  Vec out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

}  // namespace oclust
