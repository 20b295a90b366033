#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "harp/numerics.hpp"
#include "harp/transform.hpp"

namespace harp {

namespace detail {
struct StageKernels;
}

/// Forward intermediates of one apply, consumed by vjp.
class GradTape {
 public:
  GradTape();
  GradTape(GradTape&&) noexcept;
  GradTape& operator=(GradTape&&) noexcept;
  ~GradTape();

  std::size_t stage_count() const noexcept;
  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }

  struct Entry;  // defined privately in the implementation

 private:
  friend struct TapeAccess;
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::size_t param_count_ = 0;
  std::vector<Entry> entries_;
};

struct TapedApply {
  Matrix y;
  GradTape tape;
};

/// Same result as apply(p, x), bit for bit, plus the reverse-pass cache.
TapedApply apply_with_tape(const HarpProcessor& p, const Matrix& x);

struct Vjp {
  Matrix grad_x;
  std::vector<double> grad_theta;  // same layout as p.theta()
};

/// Reverse-mode gradients of <upstream, apply(p, x)>.
Vjp vjp(const HarpProcessor& p, const GradTape& tape, const Matrix& upstream);

struct PairGrads {
  std::vector<double> u;
  std::vector<double> v;
};

/// Taped two-sided rotation W~ = U^T W V and H~ = sym(V^T H V).
class LayerRotation {
 public:
  LayerRotation(const ProcessorPair& pair, const Matrix& w, const Matrix& h, bool with_curvature = true);

  const Matrix& w_rot() const noexcept { return w_rot_; }
  const Matrix& h_rot() const noexcept { return h_rot_; }

  /// Pulls dL/dW~ and dL/dH~ back to both parameter sets. grad_h_rot may be
  /// empty when the loss does not touch H~.
  PairGrads backward(const Matrix& grad_w_rot, const Matrix& grad_h_rot) const;

 private:
  const ProcessorPair* pair_;
  Matrix w_rot_;
  Matrix h_rot_;
  GradTape w_inner_, w_outer_;
  GradTape h_inner_, h_outer_;
  bool with_curvature_;
};

/// Chains loss adjoints dL/dW~ and dL/dH~ (W~ = U^T W V, H~ = V^T H V) back to
/// both processors' parameters. grad_h_rot may be empty when the loss does not
/// depend on H~. grad_h_rot must be symmetric.
PairGrads layer_grads(const ProcessorPair& pair, const Matrix& w, const Matrix& h, const Matrix& grad_w_rot,
                      const Matrix& grad_h_rot);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Max over coordinates of |analytic - numeric| / max(1e-8, |numeric|) with
/// central differences of the given step.
double finite_diff_check(const ScalarFunction& f, std::span<const double> params, std::span<const double> analytic,
                         double step = 1e-5);

/// Central-difference gradient.
std::vector<double> finite_diff_gradient(const ScalarFunction& f, std::span<const double> params,
                                         double step = 1e-5);

}  // namespace harp
