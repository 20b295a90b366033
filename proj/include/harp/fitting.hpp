#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "harp/gradcore.hpp"
#include "harp/numerics.hpp"
#include "harp/quantizers.hpp"
#include "harp/transform.hpp"

namespace harp {

/// A PTQ instance: weight W (d_out x d_in) and input second moment H.
struct LayerProblem {
  Matrix w;
  Matrix h;

  std::size_t d_out() const noexcept { return w.rows(); }
  std::size_t d_in() const noexcept { return w.cols(); }
  /// Throws invalid-input when W and H disagree or H is not symmetric.
  void validate() const;
};

struct RotatedLayer {
  Matrix w;  // U^T W V
  Matrix h;  // V^T H V, symmetrized
};

RotatedLayer rotate_layer(const ProcessorPair& pair, const LayerProblem& prob);

/// Maps a rotated-basis weight back: U W~ V^T.
Matrix unrotate_weight(const ProcessorPair& pair, const Matrix& w_rot);

/// w_j = |H~_jj| / mean(|H~_jj|); all ones when the mean is zero.
std::vector<double> normalized_weights(const Matrix& h_rot);

/// (1 / (d_out d_in)) sum_ij (W~ - target)_ij^2 wbar_j.
double loss_diag(const Matrix& w_rot, const Matrix& target, std::span<const double> wbar);
Matrix loss_diag_grad(const Matrix& w_rot, const Matrix& target, std::span<const double> wbar);

/// Convenience overload that derives wbar from the rotated curvature.
double loss_diag(const Matrix& w_rot, const Matrix& target, const Matrix& h_rot);

/// (1 / d^2) sum over off-diagonal g x g blocks of ||H~_pq||_F^2.
double loss_offblock(const Matrix& h_rot, std::size_t block);
Matrix loss_offblock_grad(const Matrix& h_rot, std::size_t block);

/// Largest divisor of dim that is <= block (warns when it differs).
std::size_t resolve_block_size(std::size_t dim, std::size_t block);

struct FitConfig {
  std::size_t steps = 1200;
  double lr = 3e-2;
  double lambda_bd = 0.1;
  std::size_t reg_block = 8;
  std::size_t refresh = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  QuantizerSpec quantizer;

  void validate() const;
};

struct FitStep {
  std::size_t step = 0;  // 1-based
  double l_diag = 0.0;
  double r_bd = 0.0;
  double l_fit = 0.0;
  bool refreshed = false;
};

struct FitTrace {
  std::vector<FitStep> steps;
  std::size_t quantizer_calls = 0;

  /// `step,L_diag,R_bd,L_fit,refreshed` header plus one line per step.
  std::string to_csv() const;
};

struct FitResult {
  ProcessorPair pair;
  FitTrace trace;
};

/// Bias-corrected Adam with constant step size.
class AdamState {
 public:
  AdamState(std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grads, double lr);
  std::size_t iterations() const noexcept { return t_; }

 private:
  std::vector<double> m_, v_;
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

struct FitLoss {
  double l_diag = 0.0;
  double r_bd = 0.0;
  double l_fit = 0.0;
};

/// Surrogate loss for a given target and weights, with its gradients.
struct FitEvaluation {
  FitLoss loss;
  PairGrads grads;
};

FitEvaluation evaluate_fit(const ProcessorPair& pair, const LayerProblem& prob, const Matrix& target,
                           std::span<const double> wbar, double lambda_bd, std::size_t block, bool with_grads);

/// L_fit with a fresh target Q(W~) and fresh weights at the current
/// parameters; the quantity reported before and after fitting.
FitLoss fresh_fit_loss(const ProcessorPair& pair, const LayerProblem& prob, const Quantizer& quantizer,
                       double lambda_bd, std::size_t block);

/// Layerwise fitting from theta = 0. `init` supplies schedules, mixers and
/// signs for both sides; its parameters are reset to zero.
FitResult fit_layer(const LayerProblem& prob, ProcessorPair init, const FitConfig& cfg);

}  // namespace harp
