#include "oclust/datagen.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace oclust {

void GenConfig::validate() const {
  if (num_speakers < 1) throw std::invalid_argument("num_speakers must be >= 1");
  if (feature_dim < 2) throw std::invalid_argument("feature_dim must be >= 2");
  if (nuisance_rank + 2 > feature_dim) {
    throw std::invalid_argument("nuisance_rank must leave at least 2 speaker dimensions");
  }
  if (!(separation_deg > 0.0 && separation_deg <= 90.0)) {
    throw std::invalid_argument("separation_deg must lie in (0, 90]");
  }
  if (noise_std < 0.0 || nuisance_std < 0.0) throw std::invalid_argument("noise must be >= 0");
  if (!(mean_turn_frames >= 1.0)) throw std::invalid_argument("mean_turn_frames must be >= 1");
  if (!(frame_hop > 0.0)) throw std::invalid_argument("frame_hop must be > 0");
}

std::vector<double> family_basis(std::size_t dim, std::uint64_t family_seed) {
  std::mt19937_64 rng(family_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Gram-Schmidt on a Gaussian matrix, column by column.
  std::vector<Vec> cols(dim, Vec(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    for (;;) {
      for (double& v : cols[c]) v = normal(rng);
      for (std::size_t p = 0; p < c; ++p) {
        const double proj = dot(cols[c], cols[p]);
        for (std::size_t r = 0; r < dim; ++r) cols[c][r] -= proj * cols[p][r];
      }
      const double n = norm(cols[c]);
      if (n > 1e-6) {
        for (double& v : cols[c]) v /= n;
        break;
      }
    }
  }
  std::vector<double> basis(dim * dim);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) basis[r * dim + c] = cols[c][r];
  }
  return basis;
}

namespace {

// Maps coordinates over the first k basis columns into feature space.
Vec embed_in_basis(const std::vector<double>& basis, std::size_t dim, const Vec& coords,
                   std::size_t first_col) {
  Vec x(dim, 0.0);
  for (std::size_t r = 0; r < dim; ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < coords.size(); ++k) s += basis[r * dim + first_col + k] * coords[k];
    x[r] = s;
  }
  return x;
}

Vec random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(dim);
  for (;;) {
    for (double& x : v) x = normal(rng);
    if (norm(v) > 1e-9) return normalized(v);
  }
}

}  // namespace

std::vector<Vec> draw_prototypes(const GenConfig& config, std::mt19937_64& rng) {
  config.validate();
  const std::size_t spk_dim = config.feature_dim - config.nuisance_rank;
  const std::vector<double> basis = family_basis(config.feature_dim, config.family_seed);

  // p_k = cos(a) c + sin(a) u_k with u_k orthogonal to c, so the expected
  // pairwise cosine is cos(a)^2 = cos(separation).
  const double cos_sep = std::cos(config.separation_deg * std::numbers::pi / 180.0);
  const double a = std::acos(std::sqrt(std::max(cos_sep, 0.0)));
  const Vec common = random_unit(spk_dim, rng);
  std::vector<Vec> protos;
  protos.reserve(config.num_speakers);
  for (int k = 0; k < config.num_speakers; ++k) {
    Vec u;
    for (;;) {
      u = random_unit(spk_dim, rng);
      const double proj = dot(u, common);
      for (std::size_t i = 0; i < spk_dim; ++i) u[i] -= proj * common[i];
      if (norm(u) > 1e-6) break;
    }
    u = normalized(u);
    Vec coords(spk_dim);
    for (std::size_t i = 0; i < spk_dim; ++i) {
      coords[i] = std::cos(a) * common[i] + std::sin(a) * u[i];
    }
    protos.push_back(embed_in_basis(basis, config.feature_dim, coords, 0));
  }
  return protos;
}

SessionSampler::SessionSampler(const GenConfig& config, std::mt19937_64& rng)
    : config_(config),
      basis_(family_basis(config.feature_dim, config.family_seed)),
      protos_(draw_prototypes(config, rng)) {}

Vec SessionSampler::frame(int speaker, std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec x = protos_.at(speaker);
  if (config_.noise_std > 0.0) {
    for (double& v : x) v += config_.noise_std * normal(rng);
  }
  if (config_.nuisance_std > 0.0 && config_.nuisance_rank > 0) {
    Vec m(config_.nuisance_rank);
    for (double& v : m) v = config_.nuisance_std * normal(rng);
    const Vec offset = embed_in_basis(basis_, config_.feature_dim, m,
                                      config_.feature_dim - config_.nuisance_rank);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += offset[i];
  }
  return x;
}

EmbeddingStream gen_stream(const GenConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const SessionSampler session(config, rng);

  std::geometric_distribution<int> turn_len(1.0 / config.mean_turn_frames);
  std::uniform_int_distribution<int> pick(0, config.num_speakers - 1);

  EmbeddingStream out;
  out.records.reserve(config.total_frames);
  int speaker = pick(rng);
  std::size_t remaining = static_cast<std::size_t>(turn_len(rng)) + 1;
  for (std::size_t k = 0; k < config.total_frames; ++k) {
    if (remaining == 0) {
      if (config.num_speakers > 1) {
        int next = pick(rng);
        while (next == speaker) next = pick(rng);
        speaker = next;
      }
      remaining = static_cast<std::size_t>(turn_len(rng)) + 1;
    }
    --remaining;

    StreamRecord rec;
    rec.t_start = static_cast<double>(k) * config.frame_hop;
    rec.t_end = static_cast<double>(k + 1) * config.frame_hop;
    rec.speaker = "spk" + std::to_string(speaker);
    rec.features = session.frame(speaker, rng);
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace oclust
