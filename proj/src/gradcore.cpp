#include "harp/gradcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "harp/error.hpp"
#include "stage_kernels.hpp"

namespace harp {

struct GradTape::Entry {
  std::size_t pass = 0;
  std::size_t stage = 0;
  std::vector<double> input;  // stage input, rows * kron_order vectors of inner_dim
  detail::StageKernels kernels;
};

GradTape::GradTape() = default;
GradTape::GradTape(GradTape&&) noexcept = default;
GradTape& GradTape::operator=(GradTape&&) noexcept = default;
GradTape::~GradTape() = default;

std::size_t GradTape::stage_count() const noexcept { return entries_.size(); }

struct TapeAccess {
  static std::vector<GradTape::Entry>& entries(GradTape& t) { return t.entries_; }
  static const std::vector<GradTape::Entry>& entries(const GradTape& t) { return t.entries_; }
  static void set_shape(GradTape& t, std::size_t rows, std::size_t dim, std::size_t params) {
    t.rows_ = rows;
    t.dim_ = dim;
    t.param_count_ = params;
  }
  static std::size_t params(const GradTape& t) { return t.param_count_; }
};

TapedApply apply_with_tape(const HarpProcessor& p, const Matrix& x) {
  if (x.cols() != p.dim()) fail(Errc::invalid_input, "input width does not match processor dimension");
  TapedApply out;
  TapeAccess::set_shape(out.tape, x.rows(), p.dim(), p.param_count());
  auto& entries = TapeAccess::entries(out.tape);

  Matrix y = x;
  detail::scale_columns(y, p.signs());
  const std::size_t n2 = p.inner_dim();
  const std::size_t inner_rows = y.rows() * p.kron_order();
  for (std::size_t pass = 0; pass < p.passes(); ++pass) {
    for (std::size_t t = 0; t < p.schedule().stages(); ++t) {
      GradTape::Entry e;
      e.pass = pass;
      e.stage = t;
      e.input = y.storage();
      e.kernels = detail::build_stage(p, pass, t, true);
      detail::stage_forward(e.kernels, y.data(), inner_rows, n2, false);
      entries.push_back(std::move(e));
    }
  }
  if (p.mode() == ProcessorMode::kronecker) detail::kron_mix(p.kron_matrix(), y.data(), y.rows(), n2, false);
  out.y = std::move(y);
  return out;
}

Vjp vjp(const HarpProcessor& p, const GradTape& tape, const Matrix& upstream) {
  const auto& entries = TapeAccess::entries(tape);
  if (tape.dim() != p.dim() || entries.size() != p.passes() * p.schedule().stages() ||
      TapeAccess::params(tape) != p.param_count()) {
    fail(Errc::invalid_tape, "tape was not produced by this processor");
  }
  if (upstream.rows() != tape.rows() || upstream.cols() != p.dim()) {
    fail(Errc::invalid_tape, "upstream shape does not match the taped forward pass");
  }

  Vjp out;
  out.grad_theta.assign(p.param_count(), 0.0);
  Matrix g = upstream;
  const std::size_t n2 = p.inner_dim();
  const std::size_t inner_rows = g.rows() * p.kron_order();
  if (p.mode() == ProcessorMode::kronecker) detail::kron_mix(p.kron_matrix(), g.data(), g.rows(), n2, true);

  std::vector<double> gin, gout;
  for (std::size_t e = entries.size(); e-- > 0;) {
    const auto& entry = entries[e];
    const auto& k = entry.kernels;
    const std::size_t b = k.radix;
    const std::size_t s = k.stride;
    const std::size_t nblocks = k.groups * s;
    std::vector<double> grad_blocks(nblocks * b * b, 0.0);
    gin.resize(b);
    gout.resize(b);

    for (std::size_t row = 0; row < inner_rows; ++row) {
      double* gx = g.data() + row * n2;
      const double* xin = entry.input.data() + row * n2;
      for (std::size_t alpha = 0; alpha < k.groups; ++alpha) {
        for (std::size_t beta = 0; beta < s; ++beta) {
          const std::size_t c = alpha * s + beta;
          const std::size_t base = alpha * b * s + beta;
          const double* kernel = k.blocks.data() + c * b * b;
          double* gb = grad_blocks.data() + c * b * b;
          for (std::size_t r = 0; r < b; ++r) gout[r] = gx[base + r * s];
          // out = B in  =>  g_in = B^T g_out, g_B += g_out in^T
          for (std::size_t q = 0; q < b; ++q) {
            double acc = 0.0;
            for (std::size_t r = 0; r < b; ++r) acc += kernel[r * b + q] * gout[r];
            gin[q] = acc;
          }
          for (std::size_t r = 0; r < b; ++r) {
            const double go = gout[r];
            if (go == 0.0) continue;
            for (std::size_t q = 0; q < b; ++q) gb[r * b + q] += go * xin[base + q * s];
          }
          for (std::size_t r = 0; r < b; ++r) gx[base + r * s] = gin[r];
        }
      }
    }

    const std::size_t per = block_param_count(b);
    const std::size_t offset = p.stage_offset(entry.pass, entry.stage);
    const BaseMixer& mixer = p.mixer(entry.stage);
    Matrix gb(b, b);
    for (std::size_t c = 0; c < nblocks; ++c) {
      std::copy(grad_blocks.begin() + c * b * b, grad_blocks.begin() + (c + 1) * b * b, gb.storage().begin());
      std::span<const double> theta = p.theta().subspan(offset + c * per, per);
      std::span<double> grad = std::span<double>(out.grad_theta).subspan(offset + c * per, per);
      block_kernel_adjoint(b, theta, mixer, gb, &k.caches[c], grad);
    }
  }
  detail::scale_columns(g, p.signs());
  out.grad_x = std::move(g);
  return out;
}

namespace {

void accumulate(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

LayerRotation::LayerRotation(const ProcessorPair& pair, const Matrix& w, const Matrix& h, bool with_curvature)
    : pair_(&pair), with_curvature_(with_curvature) {
  const std::size_t d_out = pair.u.dim();
  const std::size_t d_in = pair.v.dim();
  if (w.rows() != d_out || w.cols() != d_in) {
    fail(Errc::invalid_input, "weight is " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                                  ", processors expect " + std::to_string(d_out) + "x" + std::to_string(d_in));
  }
  // W~ = U^T (W V):  A = apply_V(W),  W~^T = apply_U(A^T).
  auto a = apply_with_tape(pair.v, w);
  auto wt = apply_with_tape(pair.u, a.y.transpose());
  w_inner_ = std::move(a.tape);
  w_outer_ = std::move(wt.tape);
  w_rot_ = wt.y.transpose();

  if (with_curvature_) {
    if (h.rows() != d_in || h.cols() != d_in) fail(Errc::invalid_input, "curvature must be d_in x d_in");
    // H~ = V^T (H V):  B = apply_V(H),  H~^T = apply_V(B^T).
    auto bh = apply_with_tape(pair.v, h);
    auto ht = apply_with_tape(pair.v, bh.y.transpose());
    h_inner_ = std::move(bh.tape);
    h_outer_ = std::move(ht.tape);
    h_rot_ = Matrix(d_in, d_in);
    for (std::size_t i = 0; i < d_in; ++i)
      for (std::size_t j = 0; j < d_in; ++j) h_rot_(i, j) = 0.5 * (ht.y(i, j) + ht.y(j, i));
  }
}

PairGrads LayerRotation::backward(const Matrix& grad_w_rot, const Matrix& grad_h_rot) const {
  const ProcessorPair& pair = *pair_;
  if (grad_w_rot.rows() != w_rot_.rows() || grad_w_rot.cols() != w_rot_.cols()) {
    fail(Errc::invalid_input, "weight adjoint shape mismatch");
  }
  PairGrads grads{std::vector<double>(pair.u.param_count(), 0.0), std::vector<double>(pair.v.param_count(), 0.0)};

  auto back_u = vjp(pair.u, w_outer_, grad_w_rot.transpose());
  accumulate(grads.u, back_u.grad_theta);
  auto back_v = vjp(pair.v, w_inner_, back_u.grad_x.transpose());
  accumulate(grads.v, back_v.grad_theta);

  if (grad_h_rot.size() != 0) {
    if (!with_curvature_) fail(Errc::invalid_input, "rotation was taped without curvature");
    const std::size_t n = h_rot_.rows();
    if (grad_h_rot.rows() != n || grad_h_rot.cols() != n) fail(Errc::invalid_input, "curvature adjoint shape mismatch");
    // Adjoint of the symmetrization, then of the transpose taken on output.
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) = 0.5 * (grad_h_rot(i, j) + grad_h_rot(j, i));
    auto back_outer = vjp(pair.v, h_outer_, g.transpose());
    accumulate(grads.v, back_outer.grad_theta);
    auto back_inner = vjp(pair.v, h_inner_, back_outer.grad_x.transpose());
    accumulate(grads.v, back_inner.grad_theta);
  }
  return grads;
}

PairGrads layer_grads(const ProcessorPair& pair, const Matrix& w, const Matrix& h, const Matrix& grad_w_rot,
                      const Matrix& grad_h_rot) {
  LayerRotation rot(pair, w, h, grad_h_rot.size() != 0);
  return rot.backward(grad_w_rot, grad_h_rot);
}

std::vector<double> finite_diff_gradient(const ScalarFunction& f, std::span<const double> params, double step) {
  if (!(step > 0.0)) fail(Errc::invalid_input, "finite-difference step must be positive");
  std::vector<double> x(params.begin(), params.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double fp = f(x);
    x[i] = orig - step;
    const double fm = f(x);
    x[i] = orig;
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

double finite_diff_check(const ScalarFunction& f, std::span<const double> params, std::span<const double> analytic,
                         double step) {
  if (analytic.size() != params.size()) fail(Errc::invalid_input, "analytic gradient length mismatch");
  const auto numeric = finite_diff_gradient(f, params, step);
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / std::max(1e-8, std::abs(numeric[i])));
  }
  return worst;
}

}  // namespace harp
