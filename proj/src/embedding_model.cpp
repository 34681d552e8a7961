#include "oclust/embedding_model.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "oclust/io.h"

namespace oclust {

EmbeddingModel::EmbeddingModel(std::size_t in, std::size_t out)
    : dim_in(in), dim_out(out), params(out * in + out, 0.0) {}

EmbeddingModel EmbeddingModel::identity(std::size_t dim) {
  EmbeddingModel m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m.weight(i, i) = 1.0;
  return m;
}

EmbeddingModel EmbeddingModel::random_orthonormal(std::size_t in, std::size_t out,
                                                   std::uint64_t seed) {
  if (out == 0 || out > in) throw std::invalid_argument("need 0 < dim_out <= dim_in");
  EmbeddingModel m(in, out);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t r = 0; r < out; ++r) {
    for (;;) {
      Vec row(in);
      for (double& v : row) v = normal(rng);
      for (std::size_t p = 0; p < r; ++p) {
        double proj = 0.0;
        for (std::size_t c = 0; c < in; ++c) proj += row[c] * m.weight(p, c);
        for (std::size_t c = 0; c < in; ++c) row[c] -= proj * m.weight(p, c);
      }
      const double n = norm(row);
      if (n < 1e-6) continue;
      for (std::size_t c = 0; c < in; ++c) m.weight(r, c) = row[c] / n;
      break;
    }
  }
  return m;
}

ForwardPass forward_pass(const EmbeddingModel& model, std::span<const double> x) {
  if (x.size() != model.dim_in) {
    throw std::invalid_argument("input dimension " + std::to_string(x.size()) +
                                " does not match model dimension " +
                                std::to_string(model.dim_in));
  }
  ForwardPass fp;
  fp.z.resize(model.dim_out);
  for (std::size_t r = 0; r < model.dim_out; ++r) {
    double s = model.bias(r);
    const double* w = &model.params[r * model.dim_in];
    for (std::size_t c = 0; c < model.dim_in; ++c) s += w[c] * x[c];
    fp.z[r] = s;
  }
  fp.z_norm = norm(fp.z);
  if (!(fp.z_norm > 0.0)) throw std::invalid_argument("degenerate embedding");
  fp.e = fp.z;
  for (double& v : fp.e) v /= fp.z_norm;
  return fp;
}

Vec EmbeddingModel::forward(std::span<const double> x) const { return forward_pass(*this, x).e; }

std::vector<Vec> EmbeddingModel::forward(const std::vector<Vec>& xs) const {
  std::vector<Vec> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(forward(x));
  return out;
}

void backprop(const EmbeddingModel& model, std::span<const double> x, const ForwardPass& fp,
              std::span<const double> grad_e, std::vector<double>& grad_params) {
  // de/dz = (I - e e^T) / |z|
  const double ge_dot_e = dot(grad_e, fp.e);
  const std::size_t bias_off = model.dim_out * model.dim_in;
  for (std::size_t r = 0; r < model.dim_out; ++r) {
    const double gz = (grad_e[r] - ge_dot_e * fp.e[r]) / fp.z_norm;
    if (gz == 0.0) continue;
    double* gw = &grad_params[r * model.dim_in];
    for (std::size_t c = 0; c < model.dim_in; ++c) gw[c] += gz * x[c];
    grad_params[bias_off + r] += gz;
  }
}

void write_checkpoint(std::ostream& out, const EmbeddingModel& model,
                      const Thresholds& thresholds) {
  out << "cgrt-checkpoint v1\n" << model.dim_out << ' ' << model.dim_in << '\n';
  for (std::size_t r = 0; r < model.dim_out; ++r) {
    for (std::size_t c = 0; c < model.dim_in; ++c) {
      out << (c ? " " : "") << format_exact(model.weight(r, c));
    }
    out << '\n';
  }
  for (std::size_t r = 0; r < model.dim_out; ++r) {
    out << (r ? " " : "") << format_exact(model.bias(r));
  }
  out << '\n';
  out << (thresholds.intra_valid ? format_exact(thresholds.l_intra) : "nan") << '\n';
  out << (thresholds.new_valid ? format_exact(thresholds.l_new) : "nan") << '\n';
  out << thresholds.iteration << '\n';
}

namespace {

double read_number(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw DataError(std::string("checkpoint truncated before ") + what);
  if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size()) throw DataError(std::string("checkpoint: bad ") + what + " '" + tok + "'");
  return v;
}

}  // namespace

void read_checkpoint(std::istream& in, EmbeddingModel& model, Thresholds& thresholds) {
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != "cgrt-checkpoint v1") throw DataError("not a cgrt-checkpoint v1 file");
  std::size_t out_dim = 0, in_dim = 0;
  if (!(in >> out_dim >> in_dim) || out_dim == 0 || in_dim == 0) {
    throw DataError("checkpoint: bad dimensions");
  }
  EmbeddingModel m(in_dim, out_dim);
  for (double& p : m.params) {
    p = read_number(in, "parameter");
    if (!std::isfinite(p)) throw DataError("checkpoint: non-finite parameter");
  }
  Thresholds th;
  const double li = read_number(in, "l_intra");
  const double ln = read_number(in, "l_new");
  th.intra_valid = !std::isnan(li);
  th.new_valid = !std::isnan(ln);
  th.l_intra = th.intra_valid ? li : 0.0;
  th.l_new = th.new_valid ? ln : 0.0;
  th.iteration = static_cast<int>(read_number(in, "iteration"));
  model = std::move(m);
  thresholds = th;
}

void write_checkpoint_file(const std::string& path, const EmbeddingModel& model,
                           const Thresholds& thresholds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_checkpoint(out, model, thresholds);
}

void read_checkpoint_file(const std::string& path, EmbeddingModel& model, Thresholds& thresholds) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  read_checkpoint(in, model, thresholds);
}

}  // namespace oclust
