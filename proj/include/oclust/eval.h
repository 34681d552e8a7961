#pragma once

#include <vector>

#include "oclust/segment.h"

namespace oclust {

inline constexpr double kScoringStep = 0.01;  // seconds

struct DerBreakdown {
  double miss = 0.0;
  double false_alarm = 0.0;
  double confusion = 0.0;
  double scored = 0.0;  // reference speech time inside the scored region

  double error() const { return miss + false_alarm + confusion; }
  double der() const { return scored > 0.0 ? error() / scored : 0.0; }
  DerBreakdown& operator+=(const DerBreakdown& o);
};

struct DerOptions {
  double collar = 0.0;        // seconds on each side of every reference boundary
  bool skip_overlap = false;  // drop frames with more than one reference speaker
};

// Frame-based DER at 10 ms resolution with an optimal one-to-one speaker
// mapping. Throws std::invalid_argument("no scored speech") when the scored
// reference time is zero.
DerBreakdown der(const SegmentTrack& reference, const SegmentTrack& hypothesis,
                 const DerOptions& options = {});

// Fraction of items whose predicted cluster disagrees with the speaker under
// the best one-to-one cluster/speaker mapping.
double frame_error(const std::vector<int>& assignments, const std::vector<int>& truths);

}  // namespace oclust
