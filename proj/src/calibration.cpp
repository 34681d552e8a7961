#include "oclust/calibration.h"

#include <algorithm>
#include <stdexcept>

namespace oclust {

std::optional<double> compute_l_intra(const PosNegLabeling& labeling,
                                      const std::vector<Vec>& embeddings,
                                      DistanceKind kind) {
  std::optional<double> best;
  for (const auto& le : labeling.neg) {
    const double d = cosine_distance(le.mu_false, embeddings.at(le.index), kind);
    if (!best || d < *best) best = d;
  }
  return best;
}

std::optional<double> compute_l_new(const PosNegLabeling& labeling,
                                    const std::vector<Vec>& embeddings,
                                    DistanceKind kind) {
  std::optional<double> best;
  for (const auto& le : labeling.pos) {
    const double d = cosine_distance(le.mu_true, embeddings.at(le.index), kind);
    if (!best || d > *best) best = d;
  }
  return best;
}

Thresholds update_thresholds(const Thresholds& current,
                             std::optional<double> new_l_intra,
                             std::optional<double> new_l_new,
                             double smoothing) {
  if (!(smoothing >= 0.0 && smoothing <= 1.0)) {
    throw std::invalid_argument("smoothing must lie in [0, 1]");
  }
  auto blend = [&](double& value, bool& valid, std::optional<double> fresh) {
    if (!fresh) return;
    const double x = std::clamp(*fresh, 0.0, 1.0);
    value = valid ? smoothing * value + (1.0 - smoothing) * x : x;
    valid = true;
  };
  Thresholds out = current;
  blend(out.l_intra, out.intra_valid, new_l_intra);
  blend(out.l_new, out.new_valid, new_l_new);
  return out;
}

}  // namespace oclust
