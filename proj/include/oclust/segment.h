#pragma once

#include <string>
#include <vector>

namespace oclust {

// Times in seconds. Duration is stored rather than end so that RTTM text
// round-trips exactly.
struct Segment {
  double start = 0.0;
  double duration = 0.0;
  std::string speaker;

  double end() const { return start + duration; }
  bool operator==(const Segment&) const = default;
};

struct SegmentTrack {
  std::vector<Segment> segments;

  bool empty() const { return segments.empty(); }
  bool operator==(const SegmentTrack&) const = default;
};

// Maximal runs of equal labels become segments named by the label value.
// Frame k starts at start_time + k * frame_duration.
SegmentTrack labels_to_segments(const std::vector<int>& labels, double frame_duration,
                                double start_time = 0.0);

// Same, but each run spans from the first frame's start to the last frame's
// end as given by per-frame timestamps.
SegmentTrack labels_to_segments(const std::vector<int>& labels, const std::vector<double>& starts,
                                const std::vector<double>& ends);

}  // namespace oclust
