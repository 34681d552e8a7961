#pragma once

#include <optional>
#include <vector>

#include "oclust/linalg.h"
#include "oclust/matching.h"

namespace oclust {

// Metric-space thresholds handed from training to inference.
struct Thresholds {
  double l_intra = 0.0;
  double l_new = 0.0;
  bool intra_valid = false;
  bool new_valid = false;
  int iteration = 0;

  bool any_valid() const { return intra_valid || new_valid; }
};

// Minimum distance of a negative embedding from the center of the cluster it
// was wrongly assigned to. Absent when there are no negatives.
std::optional<double> compute_l_intra(const PosNegLabeling& labeling,
                                      const std::vector<Vec>& embeddings,
                                      DistanceKind kind = DistanceKind::kRescaled);

// Maximum distance of a positive embedding from its own (true) center.
// Absent when there are no positives.
std::optional<double> compute_l_new(const PosNegLabeling& labeling,
                                    const std::vector<Vec>& embeddings,
                                    DistanceKind kind = DistanceKind::kRescaled);

// Present values are blended alpha * old + (1 - alpha) * new when the old
// value is valid, otherwise set directly. Absent values carry forward.
Thresholds update_thresholds(const Thresholds& current,
                             std::optional<double> new_l_intra,
                             std::optional<double> new_l_new,
                             double smoothing);

}  // namespace oclust
