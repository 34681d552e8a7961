#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oclust/calibration.h"
#include "oclust/datagen.h"
#include "oclust/embedding_model.h"
#include "oclust/matching.h"
#include "oclust/stream.h"

namespace oclust {

struct LossResult {
  double value = 0.0;
  std::vector<double> gradient;  // same layout as EmbeddingModel::params
  std::size_t terms = 0;         // pairs (posi) or negatives (nega)
  std::size_t active = 0;        // terms with a positive hinge
};

// Mean over same-label pairs i < j of max(d(e_i, e_j) - l_intra, 0).
LossResult loss_posi(const EmbeddingModel& model, const std::vector<Vec>& inputs,
                     const std::vector<int>& labels, double l_intra,
                     DistanceKind kind = DistanceKind::kRescaled);

// Mean over negatives of max(d(mu_true, e) - d(mu_false, e) + l_new, 0).
// Centers are constants.
LossResult loss_nega(const EmbeddingModel& model, const std::vector<Vec>& inputs,
                     const PosNegLabeling& labeling, double l_new,
                     DistanceKind kind = DistanceKind::kRescaled);

struct LabeledBatch {
  std::vector<Vec> inputs;
  std::vector<int> labels;  // dense speaker ids

  std::size_t num_speakers() const;
};

// Supplies one labeled training subset per iteration.
class SubsetSource {
 public:
  virtual ~SubsetSource() = default;
  virtual LabeledBatch next(std::mt19937_64& rng) = 0;
};

// Fresh synthetic sessions from one family, with a speaker count drawn
// uniformly from [min_speakers, max_speakers].
class SyntheticSubsetSource : public SubsetSource {
 public:
  SyntheticSubsetSource(GenConfig family, int min_speakers, int max_speakers,
                        std::size_t samples_per_speaker);
  LabeledBatch next(std::mt19937_64& rng) override;

 private:
  GenConfig family_;
  int min_speakers_;
  int max_speakers_;
  std::size_t samples_per_speaker_;
};

// Random contiguous windows of labeled stream files.
class StreamSubsetSource : public SubsetSource {
 public:
  // Streams must be labeled; throws std::invalid_argument otherwise.
  StreamSubsetSource(std::vector<EmbeddingStream> streams, std::size_t window_frames);
  LabeledBatch next(std::mt19937_64& rng) override;

 private:
  std::vector<LabeledBatch> batches_;
  std::size_t window_;
};

enum class WarmupClusterer { kAhc, kSpectral };

struct TrainConfig {
  int iterations = 200;
  int min_speakers = 4;
  int max_speakers = 8;
  std::size_t samples_per_speaker = 30;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double smoothing = 0.0;
  double weight_posi = 1.0;
  double weight_nega = 1.0;
  WarmupClusterer warmup = WarmupClusterer::kAhc;
  int tbsc_from_iteration = 10;  // iterations before this use the warmup clusterer
  double ahc_threshold = 0.25;
  double lambda = 0.2;            // TBSC continuity bonus during training
  bool previous_thresholds = false;  // losses use last iteration's thresholds
  double default_margin = 0.1;    // stands in for a threshold not yet calibrated
  DistanceKind distance = DistanceKind::kRescaled;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainRecord {
  int iteration = 0;
  double loss_posi = 0.0;
  double loss_nega = 0.0;
  Thresholds thresholds;
  double error = 0.0;  // frame error of the subset clustering
  std::size_t num_speakers = 0;
  bool skipped = false;
};

struct TrainReport {
  std::vector<TrainRecord> records;
};

// CSV with header iter,loss_posi,loss_nega,l_intra,l_new,err.
void write_report_csv(std::ostream& out, const TrainReport& report);

struct CorrectionResult {
  std::vector<Vec> embeddings;
  std::vector<int> assignments;
  PosNegLabeling labeling;
  std::optional<double> l_intra;
  std::optional<double> l_new;
  double error = 0.0;
};

// One prediction/correction stage without a parameter update: embed,
// cluster with the warmup clusterer (or TBSC with B = 1 when thresholds are
// given and use_tbsc is set), match against the truth and measure the
// thresholds.
CorrectionResult correction_stage(const EmbeddingModel& model, const LabeledBatch& batch,
                                  const TrainConfig& config, const Thresholds& current,
                                  bool use_tbsc);

struct TrainResult {
  EmbeddingModel model;
  Thresholds thresholds;
  TrainReport report;
};

TrainResult cgrt_train(EmbeddingModel model, SubsetSource& source, const TrainConfig& config);

}  // namespace oclust
