#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace oclust {

using Vec = std::vector<double>;

// kRescaled: (1 - cos) / 2, always in [0, 1].
// kRaw: 1 - cos clamped to [1e-6, 1 - 1e-6].
enum class DistanceKind { kRescaled, kRaw };

inline constexpr double kRawDistanceClamp = 1e-6;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

// Throws std::invalid_argument on dimension mismatch or a zero-norm input
// ("degenerate vector").
double cosine_distance(std::span<const double> a, std::span<const double> b,
                       DistanceKind kind = DistanceKind::kRescaled);

// Scale applied to (1 - cos) for the given kind. Needed by gradient code.
constexpr double distance_scale(DistanceKind kind) {
  return kind == DistanceKind::kRescaled ? 0.5 : 1.0;
}

// Running arithmetic mean. The returned centroid is not renormalized.
// When count == 0 the incoming center is ignored.
std::pair<Vec, std::size_t> centroid_add(std::span<const double> center,
                                         std::size_t count,
                                         std::span<const double> e);

// In-place form used on hot paths (beam search).
void centroid_add_inplace(Vec& center, std::size_t& count,
                          std::span<const double> e);

Vec normalized(std::span<const double> v);

}  // namespace oclust
