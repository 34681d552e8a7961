#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "oclust/calibration.h"
#include "oclust/linalg.h"

namespace oclust {

// kLog: f(x) = log x, g(x) = log(1 - x).  kLinear: f(x) = x, g(x) = 1 - x.
enum class ScoreForm { kLog, kLinear };

inline constexpr double kLogFloor = 1e-9;

struct TbscConfig {
  std::size_t beam = 1;
  std::size_t latency = 0;  // frames
  double lambda = 0.2;      // continuity bonus
  Thresholds thresholds;
  bool use_thresholds = true;  // false disables both threshold branches
  double s0 = 0.0;
  double s1 = 0.0;
  std::optional<std::size_t> max_clusters;
  ScoreForm form = ScoreForm::kLog;
  DistanceKind distance = DistanceKind::kRescaled;

  void validate() const;
};

struct Cluster {
  Vec centroid;
  std::size_t count = 0;
};

struct Hypothesis {
  std::deque<int> window;  // labels of the not yet emitted frames, oldest first
  std::vector<Cluster> clusters;
  double score = 0.0;
  int last_label = -1;
};

struct Emission {
  std::size_t frame = 0;
  int label = 0;
  bool operator==(const Emission&) const = default;
};

// Score of opening a new cluster for e.
double score_new(std::span<const double> e, const std::vector<Cluster>& clusters,
                 const TbscConfig& cfg);
// Same, given the precomputed minimum distance to existing centers.
double score_new_from_min(std::optional<double> min_distance, const TbscConfig& cfg);

// Score of assigning e to cluster `label`.
double score_existing(std::span<const double> e, const Cluster& cluster, int label,
                      int prev_label, const TbscConfig& cfg);
double score_existing_from_distance(double distance, int label, int prev_label,
                                    const TbscConfig& cfg);

// Cumulative score of one full canonical labeling, replayed from scratch.
double path_score(const std::vector<Vec>& embeddings, const std::vector<int>& labels,
                  const TbscConfig& cfg);

// Online truncated beam search. One instance serves one stream.
class TbscClusterer {
 public:
  explicit TbscClusterer(TbscConfig cfg);

  // Consumes the next frame; returns the frame that cleared the latency
  // buffer, if any.
  std::optional<Emission> step(std::span<const double> e);

  // Emits the buffered frames from the best hypothesis. Throws
  // std::logic_error when called twice.
  std::vector<Emission> flush();

  const TbscConfig& config() const { return cfg_; }
  // Sorted best first.
  const std::vector<Hypothesis>& hypotheses() const { return beam_; }
  const std::vector<int>& emitted() const { return emitted_; }
  std::size_t frames_seen() const { return frames_; }
  std::size_t peak_hypotheses() const { return peak_; }
  bool finished() const { return finished_; }

  // Emitted labels followed by the best hypothesis' pending window.
  std::vector<int> best_labels() const;

 private:
  TbscConfig cfg_;
  std::vector<Hypothesis> beam_;
  std::vector<int> emitted_;
  std::size_t frames_ = 0;
  std::size_t peak_ = 0;
  std::size_t dim_ = 0;
  bool finished_ = false;
};

// Runs step over the whole stream and flushes; one label per frame.
std::vector<int> tbsc_cluster(const std::vector<Vec>& embeddings, const TbscConfig& cfg);

// Greedy online baseline: nearest centroid when its distance is below tau,
// otherwise a new cluster.
std::vector<int> leader_follower(const std::vector<Vec>& embeddings, double tau,
                                 DistanceKind kind = DistanceKind::kRescaled);

// The tau at which f(m) and g(m) cross, i.e. the leader-follower threshold
// reproduced by TBSC with B = 1, T0 = 0, thresholds off and lambda = 0.
double matched_leader_follower_tau();

}  // namespace oclust
