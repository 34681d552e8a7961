#include "oclust/cgrt.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include "oclust/eval.h"
#include "oclust/io.h"
#include "oclust/offline_cluster.h"
#include "oclust/tbsc.h"

namespace oclust {

namespace {

// d(a, e) for unit e and its gradient in e, up to components along e (those
// vanish in backprop). Returns false for the gradient when the raw distance
// sits on its clamp.
struct DistanceGrad {
  double value;
  double scale;  // d = scale * (1 - a_hat . e) away from clamps
};

DistanceGrad distance_to(std::span<const double> a, std::span<const double> e, DistanceKind kind) {
  const double d = cosine_distance(a, e, kind);
  double scale = distance_scale(kind);
  if (kind == DistanceKind::kRaw && (d <= kRawDistanceClamp || d >= 1.0 - kRawDistanceClamp)) {
    scale = 0.0;
  }
  return {d, scale};
}

void add_scaled(std::vector<double>& acc, std::span<const double> v, double s) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s * v[i];
}

}  // namespace

LossResult loss_posi(const EmbeddingModel& model, const std::vector<Vec>& inputs,
                     const std::vector<int>& labels, double l_intra, DistanceKind kind) {
  if (inputs.size() != labels.size()) throw std::invalid_argument("inputs and labels differ in length");
  LossResult out;
  out.gradient.assign(model.params.size(), 0.0);
  const std::size_t n = inputs.size();
  std::vector<ForwardPass> fps;
  fps.reserve(n);
  for (const auto& x : inputs) fps.push_back(forward_pass(model, x));

  std::vector<Vec> grad_e(n, Vec(model.dim_out, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (labels[i] != labels[j]) continue;
      ++out.terms;
      const DistanceGrad dg = distance_to(fps[i].e, fps[j].e, kind);
      const double hinge = dg.value - l_intra;
      if (!(hinge > 0.0)) continue;
      ++out.active;
      out.value += hinge;
      add_scaled(grad_e[i], fps[j].e, -dg.scale);
      add_scaled(grad_e[j], fps[i].e, -dg.scale);
    }
  }
  if (out.terms == 0) return out;
  const double inv = 1.0 / static_cast<double>(out.terms);
  out.value *= inv;
  for (std::size_t i = 0; i < n; ++i) {
    for (double& g : grad_e[i]) g *= inv;
    backprop(model, inputs[i], fps[i], grad_e[i], out.gradient);
  }
  return out;
}

LossResult loss_nega(const EmbeddingModel& model, const std::vector<Vec>& inputs,
                     const PosNegLabeling& labeling, double l_new, DistanceKind kind) {
  LossResult out;
  out.gradient.assign(model.params.size(), 0.0);
  out.terms = labeling.neg.size();
  if (out.terms == 0) return out;
  const double inv = 1.0 / static_cast<double>(out.terms);
  for (const auto& le : labeling.neg) {
    const auto& x = inputs.at(le.index);
    const ForwardPass fp = forward_pass(model, x);
    const DistanceGrad dt = distance_to(le.mu_true, fp.e, kind);
    const DistanceGrad df = distance_to(le.mu_false, fp.e, kind);
    const double hinge = dt.value - df.value + l_new;
    if (!(hinge > 0.0)) continue;
    ++out.active;
    out.value += hinge;
    const Vec mt = normalized(le.mu_true);
    const Vec mf = normalized(le.mu_false);
    Vec ge(model.dim_out, 0.0);
    add_scaled(ge, mt, -dt.scale * inv);
    add_scaled(ge, mf, df.scale * inv);
    backprop(model, x, fp, ge, out.gradient);
  }
  out.value *= inv;
  return out;
}

std::size_t LabeledBatch::num_speakers() const {
  return std::set<int>(labels.begin(), labels.end()).size();
}

SyntheticSubsetSource::SyntheticSubsetSource(GenConfig family, int min_speakers, int max_speakers,
                                             std::size_t samples_per_speaker)
    : family_(std::move(family)),
      min_speakers_(min_speakers),
      max_speakers_(max_speakers),
      samples_per_speaker_(samples_per_speaker) {
  if (min_speakers < 1 || max_speakers < min_speakers) {
    throw std::invalid_argument("speaker range must satisfy 1 <= min <= max");
  }
  if (samples_per_speaker == 0) throw std::invalid_argument("samples_per_speaker must be >= 1");
}

LabeledBatch SyntheticSubsetSource::next(std::mt19937_64& rng) {
  GenConfig cfg = family_;
  cfg.num_speakers = std::uniform_int_distribution<int>(min_speakers_, max_speakers_)(rng);
  const SessionSampler session(cfg, rng);

  // Every speaker contributes exactly samples_per_speaker frames, cut into
  // geometric-length turns that are then shuffled into one conversation.
  std::geometric_distribution<int> turn_len(1.0 / cfg.mean_turn_frames);
  std::vector<std::pair<int, std::size_t>> turns;
  for (int k = 0; k < cfg.num_speakers; ++k) {
    std::size_t left = samples_per_speaker_;
    while (left > 0) {
      const std::size_t len = std::min(left, static_cast<std::size_t>(turn_len(rng)) + 1);
      turns.emplace_back(k, len);
      left -= len;
    }
  }
  std::shuffle(turns.begin(), turns.end(), rng);

  LabeledBatch batch;
  std::vector<int> raw;
  for (const auto& [speaker, len] : turns) {
    for (std::size_t i = 0; i < len; ++i) {
      batch.inputs.push_back(session.frame(speaker, rng));
      raw.push_back(speaker);
    }
  }
  batch.labels = canonicalize(raw);
  return batch;
}

StreamSubsetSource::StreamSubsetSource(std::vector<EmbeddingStream> streams,
                                       std::size_t window_frames)
    : window_(window_frames) {
  if (streams.empty()) throw std::invalid_argument("no training streams");
  for (const auto& s : streams) {
    if (s.empty()) continue;
    if (!s.labeled()) throw std::invalid_argument("training streams must be labeled");
    batches_.push_back({s.features(), dense_labels(s).labels});
  }
  if (batches_.empty()) throw std::invalid_argument("all training streams are empty");
  if (window_ == 0) throw std::invalid_argument("window must be >= 1 frame");
}

LabeledBatch StreamSubsetSource::next(std::mt19937_64& rng) {
  const auto& src = batches_[std::uniform_int_distribution<std::size_t>(0, batches_.size() - 1)(rng)];
  const std::size_t len = std::min(window_, src.inputs.size());
  const std::size_t start =
      std::uniform_int_distribution<std::size_t>(0, src.inputs.size() - len)(rng);
  LabeledBatch out;
  out.inputs.assign(src.inputs.begin() + start, src.inputs.begin() + start + len);
  out.labels = canonicalize({src.labels.begin() + start, src.labels.begin() + start + len});
  return out;
}

void TrainConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (min_speakers < 1 || max_speakers < min_speakers) {
    throw std::invalid_argument("speaker range must satisfy 1 <= min <= max");
  }
  if (learning_rate < 0.0) throw std::invalid_argument("learning rate must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (smoothing < 0.0 || smoothing > 1.0) throw std::invalid_argument("smoothing must lie in [0, 1]");
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
  auto num = [](bool valid, double v) { return valid ? format_exact(v) : std::string("nan"); };
  out << "iter,loss_posi,loss_nega,l_intra,l_new,err\n";
  for (const auto& r : report.records) {
    out << r.iteration << ',' << num(!r.skipped, r.loss_posi) << ','
        << num(!r.skipped, r.loss_nega) << ','
        << num(r.thresholds.intra_valid, r.thresholds.l_intra) << ','
        << num(r.thresholds.new_valid, r.thresholds.l_new) << ','
        << num(!r.skipped, r.error) << '\n';
  }
}

CorrectionResult correction_stage(const EmbeddingModel& model, const LabeledBatch& batch,
                                  const TrainConfig& config, const Thresholds& current,
                                  bool use_tbsc) {
  CorrectionResult res;
  res.embeddings = model.forward(batch.inputs);
  if (use_tbsc) {
    TbscConfig tc;
    tc.beam = 1;
    tc.latency = 0;
    tc.lambda = config.lambda;
    tc.thresholds = current;
    tc.distance = config.distance;
    res.assignments = tbsc_cluster(res.embeddings, tc);
  } else if (config.warmup == WarmupClusterer::kSpectral) {
    res.assignments = spectral(res.embeddings, batch.num_speakers(), config.seed);
  } else {
    res.assignments =
        ahc(res.embeddings, AhcConfig::with_threshold(config.ahc_threshold, config.distance)).labels;
  }
  const std::vector<Vec> centers = cluster_centers(res.embeddings, res.assignments);
  const Matching matching = max_weight_matching(build_weights(res.assignments, batch.labels));
  res.labeling = label_pos_neg(res.assignments, batch.labels, matching, centers);
  res.l_intra = compute_l_intra(res.labeling, res.embeddings, config.distance);
  res.l_new = compute_l_new(res.labeling, res.embeddings, config.distance);
  res.error = frame_error(res.assignments, batch.labels);
  return res;
}

TrainResult cgrt_train(EmbeddingModel model, SubsetSource& source, const TrainConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  Thresholds thresholds;
  TrainReport report;
  std::vector<double> velocity(model.params.size(), 0.0);

  for (int it = 1; it <= config.iterations; ++it) {
    // Prediction stage.
    const LabeledBatch batch = source.next(rng);
    TrainRecord rec;
    rec.iteration = it;
    rec.num_speakers = batch.num_speakers();
    if (rec.num_speakers < 2) {
      rec.skipped = true;
      rec.thresholds = thresholds;
      report.records.push_back(rec);
      continue;
    }

    // Correction stage.
    const bool use_tbsc = it > config.tbsc_from_iteration;
    const CorrectionResult cr = correction_stage(model, batch, config, thresholds, use_tbsc);
    const Thresholds updated =
        update_thresholds(thresholds, cr.l_intra, cr.l_new, config.smoothing);
    const Thresholds& for_loss = config.previous_thresholds ? thresholds : updated;
    const double l_intra = for_loss.intra_valid ? for_loss.l_intra : config.default_margin;
    const double l_new = for_loss.new_valid ? for_loss.l_new : config.default_margin;

    const LossResult posi = loss_posi(model, batch.inputs, batch.labels, l_intra, config.distance);
    const LossResult nega = loss_nega(model, batch.inputs, cr.labeling, l_new, config.distance);
    for (std::size_t p = 0; p < model.params.size(); ++p) {
      const double g = config.weight_posi * posi.gradient[p] + config.weight_nega * nega.gradient[p];
      velocity[p] = config.momentum * velocity[p] - config.learning_rate * g;
      model.params[p] += velocity[p];
    }

    thresholds = updated;
    thresholds.iteration = it;
    rec.loss_posi = posi.value;
    rec.loss_nega = nega.value;
    rec.thresholds = thresholds;
    rec.error = cr.error;
    report.records.push_back(rec);
  }
  return {std::move(model), thresholds, std::move(report)};
}

}  // namespace oclust
