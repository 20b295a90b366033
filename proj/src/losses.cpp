#include <algorithm>
#include <cmath>
#include <string>

#include "harp/error.hpp"
#include "harp/fitting.hpp"

namespace harp {

void LayerProblem::validate() const {
  if (w.rows() < 2 || w.cols() < 2) fail(Errc::invalid_dimension, "layer dimensions must be >= 2");
  if (h.rows() != w.cols() || h.cols() != w.cols()) {
    fail(Errc::invalid_input, "H must be d_in x d_in with d_in = " + std::to_string(w.cols()));
  }
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = i + 1; j < h.cols(); ++j)
      if (std::abs(h(i, j) - h(j, i)) > 1e-9 * std::max(1.0, h.max_abs()))
        fail(Errc::invalid_input, "H is not symmetric");
  if (!w.all_finite() || !h.all_finite()) fail(Errc::invalid_input, "layer contains non-finite values");
}

RotatedLayer rotate_layer(const ProcessorPair& pair, const LayerProblem& prob) {
  if (pair.u.dim() != prob.d_out() || pair.v.dim() != prob.d_in()) {
    fail(Errc::invalid_input, "processor dimensions do not match the layer");
  }
  RotatedLayer out;
  out.w = apply(pair.u, apply(pair.v, prob.w).transpose()).transpose();
  Matrix ht = apply(pair.v, apply(pair.v, prob.h).transpose());
  const std::size_t n = ht.rows();
  out.h = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.h(i, j) = 0.5 * (ht(i, j) + ht(j, i));
  return out;
}

Matrix unrotate_weight(const ProcessorPair& pair, const Matrix& w_rot) {
  // U A V^T = (apply_transpose_U((A V^T)^T))^T
  return apply_transpose(pair.u, apply_transpose(pair.v, w_rot).transpose()).transpose();
}

std::vector<double> normalized_weights(const Matrix& h_rot) {
  const std::size_t n = h_rot.rows();
  std::vector<double> w(n);
  double mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = std::abs(h_rot(j, j));
    mean += w[j];
  }
  mean /= static_cast<double>(n);
  if (mean == 0.0) return std::vector<double>(n, 1.0);
  for (double& v : w) v /= mean;
  return w;
}

namespace {

void check_diag_shapes(const Matrix& w_rot, const Matrix& target, std::span<const double> wbar) {
  if (w_rot.rows() != target.rows() || w_rot.cols() != target.cols() || wbar.size() != w_rot.cols()) {
    fail(Errc::invalid_input, "loss_diag shape mismatch");
  }
}

}  // namespace

double loss_diag(const Matrix& w_rot, const Matrix& target, std::span<const double> wbar) {
  check_diag_shapes(w_rot, target, wbar);
  double acc = 0.0;
  for (std::size_t i = 0; i < w_rot.rows(); ++i) {
    for (std::size_t j = 0; j < w_rot.cols(); ++j) {
      const double d = w_rot(i, j) - target(i, j);
      acc += d * d * wbar[j];
    }
  }
  return acc / static_cast<double>(w_rot.size());
}

double loss_diag(const Matrix& w_rot, const Matrix& target, const Matrix& h_rot) {
  return loss_diag(w_rot, target, normalized_weights(h_rot));
}

Matrix loss_diag_grad(const Matrix& w_rot, const Matrix& target, std::span<const double> wbar) {
  check_diag_shapes(w_rot, target, wbar);
  Matrix g(w_rot.rows(), w_rot.cols());
  const double scale = 2.0 / static_cast<double>(w_rot.size());
  for (std::size_t i = 0; i < w_rot.rows(); ++i)
    for (std::size_t j = 0; j < w_rot.cols(); ++j) g(i, j) = scale * (w_rot(i, j) - target(i, j)) * wbar[j];
  return g;
}

namespace {

void check_block(const Matrix& h, std::size_t block) {
  if (!h.square()) fail(Errc::invalid_input, "off-block energy needs a square matrix");
  if (block == 0 || h.rows() % block != 0) {
    fail(Errc::invalid_block, "block " + std::to_string(block) + " does not divide " + std::to_string(h.rows()));
  }
}

}  // namespace

double loss_offblock(const Matrix& h_rot, std::size_t block) {
  check_block(h_rot, block);
  const std::size_t n = h_rot.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i / block != j / block) acc += h_rot(i, j) * h_rot(i, j);
  return acc / static_cast<double>(n * n);
}

Matrix loss_offblock_grad(const Matrix& h_rot, std::size_t block) {
  check_block(h_rot, block);
  const std::size_t n = h_rot.rows();
  Matrix g(n, n);
  const double scale = 2.0 / static_cast<double>(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i / block != j / block) g(i, j) = scale * h_rot(i, j);
  return g;
}

std::size_t resolve_block_size(std::size_t dim, std::size_t block) {
  if (block == 0) fail(Errc::invalid_block, "block size must be positive");
  std::size_t g = std::min(block, dim);
  while (dim % g != 0) --g;
  if (g != block) {
    warn("block size " + std::to_string(block) + " does not divide " + std::to_string(dim) + "; using " +
         std::to_string(g));
  }
  return g;
}

}  // namespace harp
