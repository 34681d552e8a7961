#include "oclust/eval.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "oclust/matching.h"

namespace oclust {

SegmentTrack labels_to_segments(const std::vector<int>& labels, double frame_duration,
                                double start_time) {
  if (!(frame_duration > 0.0)) throw std::invalid_argument("frame duration must be > 0");
  SegmentTrack track;
  std::size_t begin = 0;
  for (std::size_t k = 1; k <= labels.size(); ++k) {
    if (k < labels.size() && labels[k] == labels[begin]) continue;
    Segment s;
    s.start = start_time + static_cast<double>(begin) * frame_duration;
    s.duration = static_cast<double>(k - begin) * frame_duration;
    s.speaker = std::to_string(labels[begin]);
    track.segments.push_back(std::move(s));
    begin = k;
  }
  return track;
}

SegmentTrack labels_to_segments(const std::vector<int>& labels, const std::vector<double>& starts,
                                const std::vector<double>& ends) {
  if (starts.size() != labels.size() || ends.size() != labels.size()) {
    throw std::invalid_argument("timestamps and labels differ in length");
  }
  SegmentTrack track;
  std::size_t begin = 0;
  for (std::size_t k = 1; k <= labels.size(); ++k) {
    if (k < labels.size() && labels[k] == labels[begin]) continue;
    Segment s;
    s.start = starts[begin];
    s.duration = ends[k - 1] - starts[begin];
    s.speaker = std::to_string(labels[begin]);
    track.segments.push_back(std::move(s));
    begin = k;
  }
  return track;
}

DerBreakdown& DerBreakdown::operator+=(const DerBreakdown& o) {
  miss += o.miss;
  false_alarm += o.false_alarm;
  confusion += o.confusion;
  scored += o.scored;
  return *this;
}

namespace {

long to_step(double t) { return std::lround(t / kScoringStep); }

// Per-frame speaker sets as sorted small vectors of dense ids.
struct FrameGrid {
  std::vector<std::vector<int>> speakers;
  int num_speakers = 0;
};

FrameGrid rasterize(const SegmentTrack& track, long frames) {
  FrameGrid grid;
  grid.speakers.resize(static_cast<std::size_t>(frames));
  std::map<std::string, int> ids;
  for (const auto& seg : track.segments) {
    auto [it, inserted] = ids.emplace(seg.speaker, static_cast<int>(ids.size()));
    const long lo = std::max(0L, to_step(seg.start));
    const long hi = std::min(frames, to_step(seg.end()));
    for (long f = lo; f < hi; ++f) {
      auto& cell = grid.speakers[f];
      if (std::find(cell.begin(), cell.end(), it->second) == cell.end()) cell.push_back(it->second);
    }
  }
  grid.num_speakers = static_cast<int>(ids.size());
  return grid;
}

long track_end(const SegmentTrack& track) {
  long end = 0;
  for (const auto& s : track.segments) end = std::max(end, to_step(s.end()));
  return end;
}

}  // namespace

DerBreakdown der(const SegmentTrack& reference, const SegmentTrack& hypothesis,
                 const DerOptions& options) {
  if (options.collar < 0.0) throw std::invalid_argument("collar must be >= 0");
  const long frames = std::max(track_end(reference), track_end(hypothesis));
  const FrameGrid ref = rasterize(reference, frames);
  const FrameGrid hyp = rasterize(hypothesis, frames);

  std::vector<char> scored(static_cast<std::size_t>(frames), 1);
  if (options.collar > 0.0) {
    for (const auto& seg : reference.segments) {
      for (double b : {seg.start, seg.end()}) {
        const long lo = std::max(0L, to_step(b - options.collar));
        const long hi = std::min(frames, to_step(b + options.collar));
        for (long f = lo; f < hi; ++f) scored[f] = 0;
      }
    }
  }
  if (options.skip_overlap) {
    for (long f = 0; f < frames; ++f) {
      if (ref.speakers[f].size() > 1) scored[f] = 0;
    }
  }

  // Overlap durations (in frames) between reference and hypothesis speakers.
  WeightMatrix overlap;
  overlap.rows = static_cast<std::size_t>(ref.num_speakers);
  overlap.cols = static_cast<std::size_t>(hyp.num_speakers);
  overlap.values.assign(overlap.rows * overlap.cols, 0.0);
  for (long f = 0; f < frames; ++f) {
    if (!scored[f]) continue;
    for (int r : ref.speakers[f]) {
      for (int h : hyp.speakers[f]) overlap(r, h) += 1.0;
    }
  }
  const Matching mapping = max_weight_matching(overlap);

  long miss = 0, fa = 0, conf = 0, total = 0;
  for (long f = 0; f < frames; ++f) {
    if (!scored[f]) continue;
    const long n_ref = static_cast<long>(ref.speakers[f].size());
    const long n_hyp = static_cast<long>(hyp.speakers[f].size());
    long correct = 0;
    for (int r : ref.speakers[f]) {
      const int mapped = mapping.row_to_col[r];
      if (mapped < 0) continue;
      const auto& hs = hyp.speakers[f];
      if (std::find(hs.begin(), hs.end(), mapped) != hs.end()) ++correct;
    }
    total += n_ref;
    miss += std::max(0L, n_ref - n_hyp);
    fa += std::max(0L, n_hyp - n_ref);
    conf += std::min(n_ref, n_hyp) - correct;
  }
  if (total == 0) throw std::invalid_argument("no scored speech");

  DerBreakdown out;
  out.miss = static_cast<double>(miss) * kScoringStep;
  out.false_alarm = static_cast<double>(fa) * kScoringStep;
  out.confusion = static_cast<double>(conf) * kScoringStep;
  out.scored = static_cast<double>(total) * kScoringStep;
  return out;
}

double frame_error(const std::vector<int>& assignments, const std::vector<int>& truths) {
  const Matching m = max_weight_matching(build_overlap_counts(assignments, truths));
  return 1.0 - m.total_weight / static_cast<double>(assignments.size());
}

}  // namespace oclust
