#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oclust/calibration.h"
#include "oclust/linalg.h"

namespace oclust {

// e = normalize(W x + b). Parameters are stored flat: W row-major
// (dim_out x dim_in) followed by b.
struct EmbeddingModel {
  std::size_t dim_in = 0;
  std::size_t dim_out = 0;
  std::vector<double> params;

  EmbeddingModel() = default;
  EmbeddingModel(std::size_t in, std::size_t out);

  static EmbeddingModel identity(std::size_t dim);
  // Orthonormal rows (dim_out <= dim_in) from a seeded Gaussian matrix, zero bias.
  static EmbeddingModel random_orthonormal(std::size_t in, std::size_t out, std::uint64_t seed);

  double weight(std::size_t r, std::size_t c) const { return params[r * dim_in + c]; }
  double& weight(std::size_t r, std::size_t c) { return params[r * dim_in + c]; }
  double bias(std::size_t r) const { return params[dim_out * dim_in + r]; }
  double& bias(std::size_t r) { return params[dim_out * dim_in + r]; }

  // Throws std::invalid_argument("degenerate embedding") on a zero
  // pre-activation.
  Vec forward(std::span<const double> x) const;
  std::vector<Vec> forward(const std::vector<Vec>& xs) const;

  bool operator==(const EmbeddingModel&) const = default;
};

// Pre-activation and its norm, kept for backpropagation.
struct ForwardPass {
  Vec z;
  double z_norm = 0.0;
  Vec e;
};

ForwardPass forward_pass(const EmbeddingModel& model, std::span<const double> x);

// Accumulates d(loss)/d(params) given d(loss)/d(e) for one input.
void backprop(const EmbeddingModel& model, std::span<const double> x, const ForwardPass& fp,
              std::span<const double> grad_e, std::vector<double>& grad_params);

// Text checkpoint: "cgrt-checkpoint v1", dims, weights, bias, l_intra,
// l_new, iteration. Invalid thresholds are written as "nan".
void write_checkpoint(std::ostream& out, const EmbeddingModel& model, const Thresholds& thresholds);
void read_checkpoint(std::istream& in, EmbeddingModel& model, Thresholds& thresholds);
void write_checkpoint_file(const std::string& path, const EmbeddingModel& model,
                           const Thresholds& thresholds);
void read_checkpoint_file(const std::string& path, EmbeddingModel& model, Thresholds& thresholds);

}  // namespace oclust
