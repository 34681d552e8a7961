#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "oclust/linalg.h"
#include "oclust/stream.h"

namespace oclust {

// Synthetic conversation family. Raw frame features are
//   x = prototype(speaker) + noise_std * n + nuisance_std * N m
// where n, m are standard normal and N is an orthonormal basis of a
// low-rank "channel" subspace fixed by family_seed. Prototypes are unit
// vectors in the orthogonal complement of N whose mean pairwise cosine
// equals cos(separation_deg).
struct GenConfig {
  int num_speakers = 6;
  std::size_t feature_dim = 24;
  double separation_deg = 90.0;  // in (0, 90]
  double noise_std = 0.08;
  std::size_t nuisance_rank = 8;  // < feature_dim
  double nuisance_std = 0.35;
  double mean_turn_frames = 20.0;  // geometric turn lengths
  std::size_t total_frames = 600;
  double frame_hop = 0.1;  // seconds
  std::uint64_t family_seed = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Orthonormal basis (columns, feature_dim x feature_dim row-major) whose
// last nuisance_rank columns span the channel subspace.
std::vector<double> family_basis(std::size_t feature_dim, std::uint64_t family_seed);

// Unit-norm prototype directions for one session.
std::vector<Vec> draw_prototypes(const GenConfig& config, std::mt19937_64& rng);

// Per-session sampler: prototypes drawn once, frames on demand.
class SessionSampler {
 public:
  // Draws the session's prototypes from rng.
  SessionSampler(const GenConfig& config, std::mt19937_64& rng);

  Vec frame(int speaker, std::mt19937_64& rng) const;
  const std::vector<Vec>& prototypes() const { return protos_; }

 private:
  GenConfig config_;
  std::vector<double> basis_;
  std::vector<Vec> protos_;
};

// Labeled stream with speakers named "spk0", "spk1", ... and frame k
// covering [k * hop, (k + 1) * hop).
EmbeddingStream gen_stream(const GenConfig& config);

}  // namespace oclust
