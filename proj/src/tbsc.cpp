#include "oclust/tbsc.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace oclust {

void TbscConfig::validate() const {
  if (beam < 1) throw std::invalid_argument("beam size must be >= 1");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (max_clusters && *max_clusters < 1) throw std::invalid_argument("max_clusters must be >= 1");
}

namespace {

double f_score(double x, ScoreForm form) {
  if (form == ScoreForm::kLinear) return x;
  return std::log(std::clamp(x, kLogFloor, 1.0));
}

double g_score(double x, ScoreForm form) {
  if (form == ScoreForm::kLinear) return 1.0 - x;
  return std::log(std::clamp(1.0 - x, kLogFloor, 1.0));
}

}  // namespace

double score_new_from_min(std::optional<double> min_distance, const TbscConfig& cfg) {
  if (!min_distance) return cfg.s0;
  if (cfg.use_thresholds && cfg.thresholds.new_valid && *min_distance >= cfg.thresholds.l_new) {
    return cfg.s0;
  }
  return f_score(*min_distance, cfg.form);
}

double score_new(std::span<const double> e, const std::vector<Cluster>& clusters,
                 const TbscConfig& cfg) {
  std::optional<double> m;
  for (const auto& c : clusters) {
    const double d = cosine_distance(e, c.centroid, cfg.distance);
    if (!m || d < *m) m = d;
  }
  return score_new_from_min(m, cfg);
}

double score_existing_from_distance(double distance, int label, int prev_label,
                                    const TbscConfig& cfg) {
  double base;
  if (cfg.use_thresholds && cfg.thresholds.intra_valid && distance <= cfg.thresholds.l_intra) {
    base = cfg.s1;
  } else {
    base = g_score(distance, cfg.form);
  }
  return base + (prev_label == label ? cfg.lambda : 0.0);
}

double score_existing(std::span<const double> e, const Cluster& cluster, int label,
                      int prev_label, const TbscConfig& cfg) {
  return score_existing_from_distance(cosine_distance(e, cluster.centroid, cfg.distance), label,
                                      prev_label, cfg);
}

double path_score(const std::vector<Vec>& embeddings, const std::vector<int>& labels,
                  const TbscConfig& cfg) {
  if (embeddings.size() != labels.size()) throw std::invalid_argument("length mismatch");
  std::vector<Cluster> clusters;
  double total = 0.0;
  int prev = -1;
  for (std::size_t t = 0; t < embeddings.size(); ++t) {
    const int label = labels[t];
    if (label < 0 || label > static_cast<int>(clusters.size())) {
      throw std::invalid_argument("labels are not canonical");
    }
    if (label == static_cast<int>(clusters.size())) {
      total += score_new(embeddings[t], clusters, cfg);
      clusters.emplace_back();
    } else {
      total += score_existing(embeddings[t], clusters[label], label, prev, cfg);
    }
    centroid_add_inplace(clusters[label].centroid, clusters[label].count, embeddings[t]);
    prev = label;
  }
  return total;
}

TbscClusterer::TbscClusterer(TbscConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  beam_.emplace_back();
}

namespace {

struct Candidate {
  std::size_t parent = 0;
  int label = 0;
  double score = 0.0;
};

}  // namespace

std::optional<Emission> TbscClusterer::step(std::span<const double> e) {
  if (finished_) throw std::logic_error("step after flush");
  if (frames_ == 0) {
    dim_ = e.size();
  } else if (e.size() != dim_) {
    throw std::invalid_argument("embedding dimension changed mid-stream");
  }
  const std::size_t t = frames_;

  // (a) extend every path to each existing cluster and one new cluster.
  std::vector<Candidate> cands;
  for (std::size_t p = 0; p < beam_.size(); ++p) {
    const Hypothesis& h = beam_[p];
    const std::size_t k = h.clusters.size();
    std::optional<double> min_d;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = cosine_distance(e, h.clusters[j].centroid, cfg_.distance);
      if (!min_d || d < *min_d) min_d = d;
      cands.push_back({p, static_cast<int>(j),
                       h.score + score_existing_from_distance(d, static_cast<int>(j),
                                                              h.last_label, cfg_)});
    }
    if (!cfg_.max_clusters || k < *cfg_.max_clusters) {
      cands.push_back({p, static_cast<int>(k), h.score + score_new_from_min(min_d, cfg_)});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.label != b.label) return a.label < b.label;
    return a.parent < b.parent;
  });

  // (b) merge children with identical pending windows; the best copy wins.
  {
    std::map<std::vector<int>, char> seen;
    std::vector<Candidate> unique;
    unique.reserve(cands.size());
    for (const auto& c : cands) {
      const auto& w = beam_[c.parent].window;
      std::vector<int> key(w.begin(), w.end());
      key.push_back(c.label);
      key.push_back(static_cast<int>(beam_[c.parent].clusters.size()));
      if (seen.emplace(std::move(key), 1).second) unique.push_back(c);
    }
    cands.swap(unique);
  }

  // (c) emit frame t - T0 from the best path and drop disagreeing paths.
  std::optional<Emission> emission;
  auto label_at_out = [&](const Candidate& c) {
    return cfg_.latency == 0 ? c.label : beam_[c.parent].window.front();
  };
  if (t >= cfg_.latency) {
    const int out = label_at_out(cands.front());
    emission = Emission{t - cfg_.latency, out};
    std::erase_if(cands, [&](const Candidate& c) { return label_at_out(c) != out; });
  }

  // (d) shrink to the beam size.
  if (cands.size() > cfg_.beam) cands.resize(cfg_.beam);

  std::vector<Hypothesis> next;
  next.reserve(cands.size());
  for (const auto& c : cands) {
    Hypothesis h = beam_[c.parent];
    if (c.label == static_cast<int>(h.clusters.size())) h.clusters.emplace_back();
    Cluster& cl = h.clusters[c.label];
    centroid_add_inplace(cl.centroid, cl.count, e);
    h.score = c.score;
    h.last_label = c.label;
    h.window.push_back(c.label);
    if (emission) h.window.pop_front();
    next.push_back(std::move(h));
  }
  beam_.swap(next);
  if (emission) emitted_.push_back(emission->label);
  ++frames_;
  peak_ = std::max(peak_, beam_.size());
  return emission;
}

std::vector<Emission> TbscClusterer::flush() {
  if (finished_) throw std::logic_error("flush called twice");
  finished_ = true;
  std::vector<Emission> out;
  const Hypothesis& best = beam_.front();
  std::size_t frame = emitted_.size();
  for (int label : best.window) {
    out.push_back({frame++, label});
    emitted_.push_back(label);
  }
  return out;
}

std::vector<int> TbscClusterer::best_labels() const {
  std::vector<int> labels = emitted_;
  if (!finished_) {
    const auto& w = beam_.front().window;
    labels.insert(labels.end(), w.begin(), w.end());
  }
  return labels;
}

std::vector<int> tbsc_cluster(const std::vector<Vec>& embeddings, const TbscConfig& cfg) {
  TbscClusterer clusterer(cfg);
  for (const auto& e : embeddings) clusterer.step(e);
  clusterer.flush();
  return clusterer.emitted();
}

std::vector<int> leader_follower(const std::vector<Vec>& embeddings, double tau,
                                 DistanceKind kind) {
  std::vector<Cluster> clusters;
  std::vector<int> labels;
  labels.reserve(embeddings.size());
  for (const auto& e : embeddings) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      const double d = cosine_distance(e, clusters[j].centroid, kind);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    if (best < 0 || !(best_d < tau)) {
      best = static_cast<int>(clusters.size());
      clusters.emplace_back();
    }
    centroid_add_inplace(clusters[best].centroid, clusters[best].count, e);
    labels.push_back(best);
  }
  return labels;
}

// Both score forms compare f(m) against g(m) = f(1 - m); they cross at 1/2.
double matched_leader_follower_tau() { return 0.5; }

}  // namespace oclust
