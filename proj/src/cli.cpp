#include "oclust/cli.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "oclust/cgrt.h"
#include "oclust/datagen.h"
#include "oclust/eval.h"
#include "oclust/io.h"
#include "oclust/offline_cluster.h"
#include "oclust/tbsc.h"

namespace oclust::cli {

std::pair<int, int> parse_range(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("bad range '" + text + "'");
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const int v = to_int(text);
    return {v, v};
  }
  const int lo = to_int(text.substr(0, dots));
  const int hi = to_int(text.substr(dots + 2));
  if (lo > hi) throw UsageError("range '" + text + "' is empty");
  return {lo, hi};
}

namespace {

using nlohmann::json;

// Output sink that is either the caller's stream ("-") or an owned file.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw DataError("cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }
  std::ostream* operator->() { return stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

struct FamilyOptions {
  int speakers = 6;
  std::size_t dim = 24;
  double separation = 90.0;
  double noise = 0.08;
  std::size_t nuisance_rank = 8;
  double nuisance = 0.35;
  double turn = 20.0;
  std::size_t frames = 600;
  double hop = 0.1;
  std::uint64_t family_seed = 1;

  GenConfig to_config(std::uint64_t seed) const {
    GenConfig g;
    g.num_speakers = speakers;
    g.feature_dim = dim;
    g.separation_deg = separation;
    g.noise_std = noise;
    g.nuisance_rank = nuisance_rank;
    g.nuisance_std = nuisance;
    g.mean_turn_frames = turn;
    g.total_frames = frames;
    g.frame_hop = hop;
    g.family_seed = family_seed;
    g.seed = seed;
    return g;
  }
};

void add_family_options(CLI::App* sub, FamilyOptions& f, bool session_shape) {
  if (session_shape) {
    sub->add_option("--num-speakers", f.speakers, "Speakers per synthetic session");
    sub->add_option("--frames", f.frames, "Frames per synthetic session");
  }
  sub->add_option("--dim", f.dim, "Raw feature dimension");
  sub->add_option("--separation", f.separation, "Mean inter-speaker angle in degrees (0, 90]");
  sub->add_option("--noise", f.noise, "Isotropic within-speaker noise std");
  sub->add_option("--nuisance-rank", f.nuisance_rank, "Rank of the channel-noise subspace");
  sub->add_option("--nuisance", f.nuisance, "Channel-noise std");
  sub->add_option("--turn", f.turn, "Mean turn length in frames");
  sub->add_option("--hop", f.hop, "Frame hop in seconds");
  sub->add_option("--family-seed", f.family_seed, "Seed of the channel subspace");
}

DistanceKind parse_distance(const std::string& s) {
  if (s == "rescaled") return DistanceKind::kRescaled;
  if (s == "raw") return DistanceKind::kRaw;
  throw UsageError("unknown distance '" + s + "'");
}

struct TbscOptions {
  std::size_t beam = 8;
  std::size_t latency = 25;
  double lambda = 0.2;
  double s0 = 0.0;
  double s1 = 0.0;
  std::size_t max_clusters = 0;  // 0 = unlimited
  std::string form = "log";
  std::string distance = "rescaled";
};

void add_tbsc_options(CLI::App* sub, TbscOptions& t) {
  sub->add_option("--beam", t.beam, "Beam size B")->check(CLI::PositiveNumber);
  sub->add_option("--latency", t.latency, "Latency T0 in frames");
  sub->add_option("--lambda", t.lambda, "Continuity bonus")->check(CLI::NonNegativeNumber);
  sub->add_option("--s0", t.s0, "Score of a confident new cluster");
  sub->add_option("--s1", t.s1, "Score of a confident existing cluster");
  sub->add_option("--max-clusters", t.max_clusters, "Cluster cap per path (0 = unlimited)");
  sub->add_option("--form", t.form, "Score functions: log | linear")
      ->check(CLI::IsMember({"log", "linear"}));
  sub->add_option("--distance", t.distance, "rescaled | raw")
      ->check(CLI::IsMember({"rescaled", "raw"}));
}

struct ThresholdOptions {
  std::string model;
  std::optional<double> l_intra;
  std::optional<double> l_new;
  bool no_thresholds = false;
  std::string calibrate_from;
  double ahc_threshold = 0.25;
};

void add_threshold_options(CLI::App* sub, ThresholdOptions& t) {
  sub->add_option("--model", t.model, "Checkpoint applied to the features; also supplies thresholds");
  sub->add_option("--l-intra", t.l_intra, "Override l_intra")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--l-new", t.l_new, "Override l_new")->check(CLI::Range(0.0, 1.0));
  sub->add_flag("--no-thresholds", t.no_thresholds, "Disable both threshold branches");
  sub->add_option("--calibrate-from", t.calibrate_from,
                  "Labeled stream used to measure thresholds with the model");
  sub->add_option("--ahc-threshold", t.ahc_threshold, "AHC stop distance (calibration, --algo ahc)");
}

// Model (identity when absent) plus the thresholds that go with it.
struct ScoringSetup {
  std::optional<EmbeddingModel> model;
  Thresholds thresholds;
  bool use_thresholds = true;

  std::vector<Vec> embed(const EmbeddingStream& s) const {
    if (!model) return s.features();
    if (!s.empty() && s.dim() != model->dim_in) {
      throw DataError("stream dimension " + std::to_string(s.dim()) +
                      " does not match model input dimension " + std::to_string(model->dim_in));
    }
    return model->forward(s.features());
  }
};

ScoringSetup resolve_scoring(const ThresholdOptions& t, const TbscOptions& tb) {
  ScoringSetup setup;
  if (!t.model.empty()) {
    EmbeddingModel m;
    read_checkpoint_file(t.model, m, setup.thresholds);
    setup.model = std::move(m);
  }
  if (!t.calibrate_from.empty()) {
    const EmbeddingStream cal = read_stream_file(t.calibrate_from);
    if (!cal.labeled() || cal.empty()) {
      throw UsageError("--calibrate-from needs a non-empty labeled stream");
    }
    LabeledBatch batch{cal.features(), dense_labels(cal).labels};
    const EmbeddingModel model =
        setup.model ? *setup.model : EmbeddingModel::identity(cal.dim());
    TrainConfig tc;
    tc.ahc_threshold = t.ahc_threshold;
    tc.lambda = tb.lambda;
    tc.distance = parse_distance(tb.distance);
    const CorrectionResult cr =
        correction_stage(model, batch, tc, setup.thresholds, setup.thresholds.any_valid());
    setup.thresholds = update_thresholds(setup.thresholds, cr.l_intra, cr.l_new, 0.0);
  }
  if (t.l_intra) {
    setup.thresholds.l_intra = *t.l_intra;
    setup.thresholds.intra_valid = true;
  }
  if (t.l_new) {
    setup.thresholds.l_new = *t.l_new;
    setup.thresholds.new_valid = true;
  }
  setup.use_thresholds = !t.no_thresholds;
  return setup;
}

TbscConfig make_tbsc_config(const TbscOptions& t, const ScoringSetup& setup) {
  TbscConfig c;
  c.beam = t.beam;
  c.latency = t.latency;
  c.lambda = t.lambda;
  c.s0 = t.s0;
  c.s1 = t.s1;
  if (t.max_clusters > 0) c.max_clusters = t.max_clusters;
  c.form = t.form == "linear" ? ScoreForm::kLinear : ScoreForm::kLog;
  c.distance = parse_distance(t.distance);
  c.thresholds = setup.thresholds;
  c.use_thresholds = setup.use_thresholds;
  return c;
}

std::vector<double> starts_of(const EmbeddingStream& s) {
  std::vector<double> v;
  for (const auto& r : s.records) v.push_back(r.t_start);
  return v;
}

std::vector<double> ends_of(const EmbeddingStream& s) {
  std::vector<double> v;
  for (const auto& r : s.records) v.push_back(r.t_end);
  return v;
}

// Reference track from a labeled stream, speakers keep their names.
SegmentTrack reference_track(const EmbeddingStream& s) {
  const DenseLabels dl = dense_labels(s);
  SegmentTrack t = labels_to_segments(dl.labels, starts_of(s), ends_of(s));
  for (auto& seg : t.segments) seg.speaker = dl.names[std::stoi(seg.speaker)];
  return t;
}

std::string file_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// What a command reports back for its manifest.
struct CommandResult {
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
};

// --------------------------------------------------------------------------
// gen

struct GenOptions {
  FamilyOptions family;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string rttm;
  std::string file_id = "session";
  bool unlabeled = false;
};

CommandResult cmd_gen(const GenOptions& o, std::ostream& out) {
  const EmbeddingStream stream = gen_stream(o.family.to_config(o.seed));
  {
    Sink sink(o.out, out);
    write_stream(*sink, stream, !o.unlabeled);
    sink->flush();
  }
  CommandResult res{{o.out}, o.seed};
  if (!o.rttm.empty()) {
    Sink sink(o.rttm, out);
    write_rttm(*sink, o.file_id, reference_track(stream));
    res.outputs.push_back(o.rttm);
  }
  return res;
}

// --------------------------------------------------------------------------
// train

struct TrainOptions {
  FamilyOptions family;
  std::uint64_t seed = 0;
  std::uint64_t init_seed = 1;
  std::string init_model;
  int iters = 200;
  double lr = 0.05;
  double momentum = 0.9;
  double smoothing = 0.0;
  double weight_posi = 1.0;
  double weight_nega = 1.0;
  std::string speakers = "4..8";
  std::size_t samples_per_speaker = 30;
  std::size_t dim_out = 16;
  std::vector<std::string> streams;
  std::size_t window = 200;
  std::string warmup = "ahc";
  int tbsc_from = 10;
  double ahc_threshold = 0.25;
  double lambda = 0.2;
  bool previous_thresholds = false;
  std::string distance = "rescaled";
  std::string out;
  std::string report;
};

CommandResult cmd_train(const TrainOptions& o) {
  TrainConfig tc;
  tc.iterations = o.iters;
  std::tie(tc.min_speakers, tc.max_speakers) = parse_range(o.speakers);
  tc.samples_per_speaker = o.samples_per_speaker;
  tc.learning_rate = o.lr;
  tc.momentum = o.momentum;
  tc.smoothing = o.smoothing;
  tc.weight_posi = o.weight_posi;
  tc.weight_nega = o.weight_nega;
  tc.warmup = o.warmup == "spectral" ? WarmupClusterer::kSpectral : WarmupClusterer::kAhc;
  tc.tbsc_from_iteration = o.tbsc_from;
  tc.ahc_threshold = o.ahc_threshold;
  tc.lambda = o.lambda;
  tc.previous_thresholds = o.previous_thresholds;
  tc.distance = parse_distance(o.distance);
  tc.seed = o.seed;
  try {
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::unique_ptr<SubsetSource> source;
  std::size_t dim_in = o.family.dim;
  if (!o.streams.empty()) {
    std::vector<EmbeddingStream> streams;
    for (const auto& path : o.streams) {
      EmbeddingStream s = read_stream_file(path);
      if (!s.labeled()) throw UsageError("training stream " + path + " is unlabeled");
      if (!streams.empty() && !s.empty() && !streams.front().empty() &&
          s.dim() != streams.front().dim()) {
        throw DataError("training streams differ in dimension");
      }
      streams.push_back(std::move(s));
    }
    for (const auto& s : streams) {
      if (!s.empty()) dim_in = s.dim();
    }
    source = std::make_unique<StreamSubsetSource>(std::move(streams), o.window);
  } else {
    source = std::make_unique<SyntheticSubsetSource>(o.family.to_config(0), tc.min_speakers,
                                                     tc.max_speakers, o.samples_per_speaker);
  }

  EmbeddingModel model;
  if (!o.init_model.empty()) {
    Thresholds ignored;
    read_checkpoint_file(o.init_model, model, ignored);
    if (model.dim_in != dim_in) throw DataError("initial model does not match input dimension");
  } else {
    if (o.dim_out == 0 || o.dim_out > dim_in) throw UsageError("--dim-out must lie in [1, input dim]");
    model = EmbeddingModel::random_orthonormal(dim_in, o.dim_out, o.init_seed);
  }

  const TrainResult result = cgrt_train(std::move(model), *source, tc);
  write_checkpoint_file(o.out, result.model, result.thresholds);
  CommandResult res{{o.out}, o.seed};
  if (!o.report.empty()) {
    std::ofstream rep(o.report);
    if (!rep) throw DataError("cannot write " + o.report);
    write_report_csv(rep, result.report);
    res.outputs.push_back(o.report);
  }
  return res;
}

// --------------------------------------------------------------------------
// cluster

struct ClusterOptions {
  std::string input;
  std::string algo = "tbsc";
  TbscOptions tbsc;
  ThresholdOptions thresholds;
  std::optional<double> tau;
  std::size_t num_speakers = 0;
  std::uint64_t seed = 0;
  std::string output = "-";
  std::string rttm;
  std::string file_id;
};

CommandResult cmd_cluster(const ClusterOptions& o, std::ostream& out, std::ostream& err) {
  const EmbeddingStream stream = read_stream_file(o.input);
  const ScoringSetup setup = resolve_scoring(o.thresholds, o.tbsc);
  const std::vector<Vec> embeddings = setup.embed(stream);
  const TbscConfig cfg = make_tbsc_config(o.tbsc, setup);

  Sink sink(o.output, out);
  auto emit = [&](const Emission& em) {
    *sink << em.frame << '\t' << em.label << '\n';
    sink->flush();
  };

  std::vector<int> labels;
  if (o.algo == "tbsc") {
    TbscClusterer clusterer(cfg);
    for (const auto& e : embeddings) {
      if (auto em = clusterer.step(e)) emit(*em);
    }
    for (const auto& em : clusterer.flush()) emit(em);
    labels = clusterer.emitted();
    err << "frames=" << clusterer.frames_seen()
        << " peak_hypotheses=" << clusterer.peak_hypotheses() << '\n';
  } else {
    if (o.algo == "lfc") {
      labels = leader_follower(embeddings, o.tau.value_or(matched_leader_follower_tau()),
                               cfg.distance);
    } else if (o.algo == "ahc") {
      const AhcConfig ac = o.num_speakers > 0
                               ? AhcConfig::with_target(o.num_speakers, cfg.distance)
                               : AhcConfig::with_threshold(o.thresholds.ahc_threshold, cfg.distance);
      labels = ahc(embeddings, ac).labels;
    } else {
      if (o.num_speakers == 0) throw UsageError("--algo spectral needs --num-speakers");
      if (!embeddings.empty()) labels = spectral(embeddings, std::min(o.num_speakers, embeddings.size()), o.seed);
    }
    for (std::size_t k = 0; k < labels.size(); ++k) emit({k, labels[k]});
  }

  CommandResult res{{o.output}, o.seed};
  if (!o.rttm.empty()) {
    std::ofstream r(o.rttm);
    if (!r) throw DataError("cannot write " + o.rttm);
    const std::string id = o.file_id.empty() ? file_stem(o.input) : o.file_id;
    write_rttm(r, id, labels_to_segments(labels, starts_of(stream), ends_of(stream)));
    res.outputs.push_back(o.rttm);
  }
  return res;
}

// --------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string ref;
  std::string hyp;
  std::vector<double> collars{0.25, 0.0};
  bool skip_overlap = false;
  std::string output = "-";
};

void write_der_csv(std::ostream& out, const RttmTracks& ref, const RttmTracks& hyp,
                   const DerOptions& opts) {
  out << "file,der,miss,fa,conf,scored_seconds\n";
  DerBreakdown total;
  for (const auto& [id, track] : ref) {
    DerBreakdown b;
    try {
      b = der(track, hyp.at(id), opts);
    } catch (const std::invalid_argument& e) {
      throw DataError("file " + id + ": " + e.what());
    }
    total += b;
    out << id << ',' << format_shortest(b.der()) << ',' << format_shortest(b.miss) << ','
        << format_shortest(b.false_alarm) << ',' << format_shortest(b.confusion) << ','
        << format_shortest(b.scored) << '\n';
  }
  out << "ALL," << format_shortest(total.der()) << ',' << format_shortest(total.miss) << ','
      << format_shortest(total.false_alarm) << ',' << format_shortest(total.confusion) << ','
      << format_shortest(total.scored) << '\n';
}

std::string collar_path(const std::string& path, double collar) {
  std::filesystem::path p(path);
  const std::string name = p.stem().string() + "_collar" + format_shortest(collar) +
                           p.extension().string();
  return (p.parent_path() / name).string();
}

CommandResult cmd_eval(const EvalOptions& o, std::ostream& out) {
  const RttmTracks ref = read_rttm_file(o.ref);
  const RttmTracks hyp = read_rttm_file(o.hyp);
  std::vector<std::string> missing, extra;
  for (const auto& [id, t] : ref) {
    if (!hyp.count(id)) missing.push_back(id);
  }
  for (const auto& [id, t] : hyp) {
    if (!ref.count(id)) extra.push_back(id);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "file-id mismatch;";
    if (!missing.empty()) {
      msg += " missing from hypothesis:";
      for (const auto& id : missing) msg += " " + id;
      msg += ";";
    }
    if (!extra.empty()) {
      msg += " missing from reference:";
      for (const auto& id : extra) msg += " " + id;
    }
    throw DataError(msg);
  }
  if (ref.empty()) throw DataError("reference has no segments");

  CommandResult res;
  for (double collar : o.collars) {
    if (collar < 0.0) throw UsageError("collars must be >= 0");
    const DerOptions opts{collar, o.skip_overlap};
    if (o.output == "-") {
      if (o.collars.size() > 1) out << "# collar=" << format_shortest(collar) << '\n';
      write_der_csv(out, ref, hyp, opts);
    } else {
      const std::string path = o.collars.size() > 1 ? collar_path(o.output, collar) : o.output;
      std::ofstream f(path);
      if (!f) throw DataError("cannot write " + path);
      write_der_csv(f, ref, hyp, opts);
      res.outputs.push_back(path);
    }
  }
  if (o.output == "-") res.outputs.push_back("-");
  return res;
}

// --------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::vector<std::size_t> beams{1, 2, 4, 8};
  std::vector<std::size_t> latencies{0, 5, 10, 25};
  TbscOptions tbsc;
  ThresholdOptions thresholds;
  FamilyOptions family;
  int seeds = 20;
  std::uint64_t seed_base = 5000;
  std::vector<std::string> streams;
  std::string ref;
  double collar = 0.25;
  bool skip_overlap = false;
  unsigned jobs = 1;
  std::uint64_t shuffle_seed = 0;
  std::string output = "-";
  std::string timing;
};

struct SweepSession {
  std::vector<Vec> embeddings;
  SegmentTrack reference;
  std::vector<double> starts, ends;
};

struct SweepCell {
  std::size_t beam = 0;
  std::size_t latency = 0;
  double der = 0.0;
  std::size_t peak = 0;
  double seconds = 0.0;
};

CommandResult cmd_sweep(const SweepOptions& o, std::ostream& out) {
  const ScoringSetup setup = resolve_scoring(o.thresholds, o.tbsc);
  std::vector<SweepSession> sessions;
  if (!o.streams.empty()) {
    if (o.ref.empty()) throw UsageError("--streams needs --ref");
    const RttmTracks ref = read_rttm_file(o.ref);
    for (const auto& path : o.streams) {
      const EmbeddingStream s = read_stream_file(path);
      const auto it = ref.find(file_stem(path));
      if (it == ref.end()) throw DataError("no reference for file id " + file_stem(path));
      sessions.push_back({setup.embed(s), it->second, starts_of(s), ends_of(s)});
    }
  } else {
    if (o.seeds < 1) throw UsageError("--seeds must be >= 1");
    for (int k = 0; k < o.seeds; ++k) {
      const EmbeddingStream s = gen_stream(o.family.to_config(o.seed_base + k));
      sessions.push_back({setup.embed(s), reference_track(s), starts_of(s), ends_of(s)});
    }
  }

  std::vector<SweepCell> cells;
  for (std::size_t b : o.beams) {
    for (std::size_t l : o.latencies) cells.push_back({b, l});
  }
  std::sort(cells.begin(), cells.end(), [](const SweepCell& a, const SweepCell& b) {
    return a.beam != b.beam ? a.beam < b.beam : a.latency < b.latency;
  });
  cells.erase(std::unique(cells.begin(), cells.end(),
                          [](const SweepCell& a, const SweepCell& b) {
                            return a.beam == b.beam && a.latency == b.latency;
                          }),
              cells.end());

  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  if (o.shuffle_seed != 0) {
    std::mt19937_64 rng(o.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  const DerOptions der_opts{o.collar, o.skip_overlap};
  auto run_cell = [&](SweepCell& cell) {
    const auto t0 = std::chrono::steady_clock::now();
    TbscOptions to = o.tbsc;
    to.beam = cell.beam;
    to.latency = cell.latency;
    const TbscConfig cfg = make_tbsc_config(to, setup);
    double der_sum = 0.0;
    for (const auto& s : sessions) {
      TbscClusterer clusterer(cfg);
      for (const auto& e : s.embeddings) clusterer.step(e);
      clusterer.flush();
      cell.peak = std::max(cell.peak, clusterer.peak_hypotheses());
      der_sum += der(s.reference, labels_to_segments(clusterer.emitted(), s.starts, s.ends),
                     der_opts).der();
    }
    cell.der = der_sum / static_cast<double>(sessions.size());
    cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= order.size()) return;
      try {
        run_cell(cells[order[k]]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  CommandResult res{{o.output}, o.seed_base};
  {
    Sink sink(o.output, out);
    *sink << "beam,latency,der,peak_hypotheses\n";
    for (const auto& c : cells) {
      *sink << c.beam << ',' << c.latency << ',' << format_exact(c.der) << ',' << c.peak << '\n';
    }
    sink->flush();
  }
  std::string timing = o.timing;
  if (timing.empty() && o.output != "-") timing = o.output + ".timing.csv";
  if (!timing.empty()) {
    std::ofstream t(timing);
    if (!t) throw DataError("cannot write " + timing);
    t << "beam,latency,wall_clock_seconds\n";
    for (const auto& c : cells) t << c.beam << ',' << c.latency << ',' << c.seconds << '\n';
    res.outputs.push_back(timing);
  }
  return res;
}

// --------------------------------------------------------------------------
// manifest

json resolved_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string key =
        opt->get_lnames().empty() ? opt->get_name(true) : opt->get_lnames().front();
    if (key.empty()) continue;
    if (key == "help" || key == "manifest") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_type_size() == 0) {
        cfg[key] = true;
      } else if (r.size() == 1 && opt->get_items_expected_max() <= 1) {
        cfg[key] = r.front();
      } else {
        cfg[key] = r;
      }
    } else {
      cfg[key] = opt->get_default_str();
    }
  }
  return cfg;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& args, const CLI::App* sub,
                    const CommandResult& res, double seconds) {
  json m;
  m["command"] = command;
  m["args"] = args;
  m["config"] = resolved_config(sub);
  m["seed"] = res.seed ? json(*res.seed) : json(nullptr);
  m["versions"] = {{"oclust", kVersion}, {"cxx", __cplusplus},
                   {"compiler", __VERSION__}};
  m["outputs"] = res.outputs;
  m["started_at"] = utc_now();
  m["wall_clock_seconds"] = seconds;
  std::ofstream f(path);
  if (!f) throw DataError("cannot write manifest " + path);
  f << m.dump(2) << '\n';
}

std::vector<std::string> read_manifest_args(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open manifest " + path);
  json m;
  try {
    f >> m;
    return m.at("args").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError("bad manifest " + path + ": " + e.what());
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online speaker clustering: CGRT training, TBSC inference, DER scoring"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string manifest;
  auto add_manifest = [&](CLI::App* sub) {
    sub->add_option("--manifest", manifest, "Run manifest path");
  };

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a synthetic labeled stream");
  add_family_options(gen_cmd, gen.family, true);
  gen_cmd->add_option("--seed", gen.seed, "Session seed")->required();
  gen_cmd->add_option("--out", gen.out, "Stream CSV output");
  gen_cmd->add_option("--rttm", gen.rttm, "Reference RTTM output");
  gen_cmd->add_option("--file-id", gen.file_id, "RTTM file id");
  gen_cmd->add_flag("--unlabeled", gen.unlabeled, "Omit the speaker column");
  add_manifest(gen_cmd);

  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "Clustering-guided recurrent training");
  add_family_options(train_cmd, train.family, false);
  train_cmd->add_option("--seed", train.seed, "Training seed");
  train_cmd->add_option("--init-seed", train.init_seed, "Seed of the initial projection");
  train_cmd->add_option("--init-model", train.init_model, "Start from this checkpoint");
  train_cmd->add_option("--iters", train.iters, "Iterations");
  train_cmd->add_option("--lr", train.lr, "Learning rate");
  train_cmd->add_option("--momentum", train.momentum, "Momentum");
  train_cmd->add_option("--smoothing", train.smoothing, "Threshold smoothing alpha");
  train_cmd->add_option("--weight-posi", train.weight_posi, "Weight of the pull loss");
  train_cmd->add_option("--weight-nega", train.weight_nega, "Weight of the push loss");
  train_cmd->add_option("--speakers", train.speakers, "Speakers per subset, e.g. 4..8");
  train_cmd->add_option("--samples-per-speaker", train.samples_per_speaker, "Frames per speaker");
  train_cmd->add_option("--dim-out", train.dim_out, "Embedding dimension");
  train_cmd->add_option("--streams", train.streams, "Labeled stream files instead of synthetic data");
  train_cmd->add_option("--window", train.window, "Subset length in frames for --streams");
  train_cmd->add_option("--warmup", train.warmup, "Warmup clusterer: ahc | spectral")
      ->check(CLI::IsMember({"ahc", "spectral"}));
  train_cmd->add_option("--tbsc-from", train.tbsc_from, "Iterations clustered by the warmup clusterer");
  train_cmd->add_option("--ahc-threshold", train.ahc_threshold, "AHC stop distance");
  train_cmd->add_option("--lambda", train.lambda, "TBSC continuity bonus during training");
  train_cmd->add_flag("--previous-thresholds", train.previous_thresholds,
                      "Losses use the previous iteration's thresholds");
  train_cmd->add_option("--distance", train.distance, "rescaled | raw")
      ->check(CLI::IsMember({"rescaled", "raw"}));
  train_cmd->add_option("--out", train.out, "Checkpoint output")->required();
  train_cmd->add_option("--report", train.report, "Training report CSV");
  add_manifest(train_cmd);

  ClusterOptions cluster;
  CLI::App* cluster_cmd = app.add_subcommand("cluster", "Cluster a stream online");
  cluster_cmd->add_option("--input", cluster.input, "Stream CSV")->required();
  cluster_cmd->add_option("--algo", cluster.algo, "tbsc | lfc | ahc | spectral")
      ->check(CLI::IsMember({"tbsc", "lfc", "ahc", "spectral"}));
  add_tbsc_options(cluster_cmd, cluster.tbsc);
  add_threshold_options(cluster_cmd, cluster.thresholds);
  cluster_cmd->add_option("--tau", cluster.tau, "Leader-follower new-cluster distance");
  cluster_cmd->add_option("--num-speakers", cluster.num_speakers, "Target clusters (ahc, spectral)");
  cluster_cmd->add_option("--seed", cluster.seed, "Seed (spectral k-means)");
  cluster_cmd->add_option("--output", cluster.output, "frame<TAB>label output");
  cluster_cmd->add_option("--rttm", cluster.rttm, "Also write segments as RTTM");
  cluster_cmd->add_option("--file-id", cluster.file_id, "RTTM file id (default: input stem)");
  add_manifest(cluster_cmd);

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score hypothesis RTTM against reference RTTM");
  eval_cmd->add_option("--ref", eval.ref, "Reference RTTM")->required();
  eval_cmd->add_option("--hyp", eval.hyp, "Hypothesis RTTM")->required();
  eval_cmd->add_option("--collars", eval.collars, "Collars in seconds")->delimiter(',');
  eval_cmd->add_flag("--skip-overlap", eval.skip_overlap, "Do not score overlapped speech");
  eval_cmd->add_option("--output", eval.output, "Report CSV");
  add_manifest(eval_cmd);

  SweepOptions sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Beam size x latency sweep");
  sweep_cmd->add_option("--beams", sweep.beams, "Beam sizes")->delimiter(',');
  sweep_cmd->add_option("--latencies", sweep.latencies, "Latencies in frames")->delimiter(',');
  add_tbsc_options(sweep_cmd, sweep.tbsc);
  sweep.tbsc.max_clusters = 10;
  sweep_cmd->get_option("--max-clusters")->default_val(10);
  add_threshold_options(sweep_cmd, sweep.thresholds);
  add_family_options(sweep_cmd, sweep.family, true);
  sweep_cmd->add_option("--seeds", sweep.seeds, "Synthetic sessions");
  sweep_cmd->add_option("--seed-base", sweep.seed_base, "Seed of the first synthetic session");
  sweep_cmd->add_option("--streams", sweep.streams, "Stream files instead of synthetic sessions");
  sweep_cmd->add_option("--ref", sweep.ref, "Reference RTTM for --streams (ids = file stems)");
  sweep_cmd->add_option("--collar", sweep.collar, "DER collar in seconds");
  sweep_cmd->add_flag("--skip-overlap", sweep.skip_overlap, "Do not score overlapped speech");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Cells run concurrently")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--shuffle-seed", sweep.shuffle_seed, "Randomize cell execution order");
  sweep_cmd->add_option("--output", sweep.output, "Sweep CSV");
  sweep_cmd->add_option("--timing", sweep.timing, "Per-cell wall-clock CSV");
  add_manifest(sweep_cmd);

  std::string rerun_path;
  CLI::App* rerun_cmd = app.add_subcommand("rerun", "Re-execute the command recorded in a manifest");
  rerun_cmd->add_option("manifest", rerun_path, "Manifest JSON")->required();

  std::vector<std::string> argv_store{"oclust"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (rerun_cmd->parsed()) {
      return run(read_manifest_args(rerun_path), out, err);
    }
    const auto t0 = std::chrono::steady_clock::now();
    CommandResult res;
    CLI::App* sub = nullptr;
    std::string primary;
    if (gen_cmd->parsed()) {
      sub = gen_cmd;
      res = cmd_gen(gen, out);
      primary = gen.out;
    } else if (train_cmd->parsed()) {
      sub = train_cmd;
      res = cmd_train(train);
      primary = train.out;
    } else if (cluster_cmd->parsed()) {
      sub = cluster_cmd;
      res = cmd_cluster(cluster, out, err);
      primary = cluster.output != "-" ? cluster.output : cluster.rttm;
    } else if (eval_cmd->parsed()) {
      sub = eval_cmd;
      res = cmd_eval(eval, out);
      primary = eval.output;
    } else {
      sub = sweep_cmd;
      res = cmd_sweep(sweep, out);
      primary = sweep.output;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string path = manifest;
    if (path.empty()) {
      path = (!primary.empty() && primary != "-") ? primary + ".manifest.json"
                                                  : "oclust-" + sub->get_name() + ".manifest.json";
    }
    write_manifest(path, sub->get_name(), args, sub, res, seconds);
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace oclust::cli
