#include "harp/fitting.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "harp/error.hpp"

namespace harp {

void FitConfig::validate() const {
  if (steps < 1) fail(Errc::invalid_input, "fit steps must be >= 1");
  if (refresh < 1) fail(Errc::invalid_input, "refresh interval must be >= 1");
  if (!(lambda_bd >= 0.0)) fail(Errc::invalid_input, "lambda_bd must be >= 0");
  if (!(lr > 0.0)) fail(Errc::invalid_input, "learning rate must be positive");
  if (reg_block < 1) fail(Errc::invalid_input, "regularizer block must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && eps > 0.0)) {
    fail(Errc::invalid_input, "Adam betas must lie in [0, 1) and eps must be positive");
  }
}

std::string FitTrace::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "step,L_diag,R_bd,L_fit,refreshed\n";
  for (const auto& s : steps)
    os << s.step << ',' << s.l_diag << ',' << s.r_bd << ',' << s.l_fit << ',' << (s.refreshed ? 1 : 0) << '\n';
  return os.str();
}

AdamState::AdamState(std::size_t n, double beta1, double beta2, double eps)
    : m_(n, 0.0), v_(n, 0.0), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamState::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    fail(Errc::invalid_input, "Adam state has " + std::to_string(m_.size()) + " slots, got " +
                                  std::to_string(params.size()) + " params and " + std::to_string(grads.size()) +
                                  " grads");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
  }
}

namespace {

FitEvaluation evaluate_rotated(const LayerRotation& rot, const Matrix& target, std::span<const double> wbar,
                               double lambda_bd, std::size_t block, bool with_grads) {
  FitEvaluation ev;
  ev.loss.l_diag = loss_diag(rot.w_rot(), target, wbar);
  ev.loss.r_bd = loss_offblock(rot.h_rot(), block);
  ev.loss.l_fit = ev.loss.l_diag + lambda_bd * ev.loss.r_bd;
  if (with_grads) {
    Matrix gw = loss_diag_grad(rot.w_rot(), target, wbar);
    Matrix gh;
    if (lambda_bd > 0.0) gh = lambda_bd * loss_offblock_grad(rot.h_rot(), block);
    ev.grads = rot.backward(gw, gh);
  }
  return ev;
}

}  // namespace

FitEvaluation evaluate_fit(const ProcessorPair& pair, const LayerProblem& prob, const Matrix& target,
                           std::span<const double> wbar, double lambda_bd, std::size_t block, bool with_grads) {
  LayerRotation rot(pair, prob.w, prob.h, true);
  return evaluate_rotated(rot, target, wbar, lambda_bd, block, with_grads);
}

FitLoss fresh_fit_loss(const ProcessorPair& pair, const LayerProblem& prob, const Quantizer& quantizer,
                       double lambda_bd, std::size_t block) {
  const RotatedLayer rot = rotate_layer(pair, prob);
  FitLoss loss;
  loss.l_diag = loss_diag(rot.w, quantizer(rot.w), normalized_weights(rot.h));
  loss.r_bd = loss_offblock(rot.h, block);
  loss.l_fit = loss.l_diag + lambda_bd * loss.r_bd;
  return loss;
}

FitResult fit_layer(const LayerProblem& prob, ProcessorPair init, const FitConfig& cfg) {
  cfg.validate();
  prob.validate();
  if (init.u.dim() != prob.d_out() || init.v.dim() != prob.d_in()) {
    fail(Errc::invalid_input, "processor dimensions do not match the layer");
  }
  FitResult result{std::move(init), {}};
  ProcessorPair& pair = result.pair;
  pair.u.set_zero();
  pair.v.set_zero();

  const Quantizer quantizer(cfg.quantizer);
  const std::size_t block = resolve_block_size(prob.d_in(), cfg.reg_block);
  AdamState adam_u(pair.u.param_count(), cfg.beta1, cfg.beta2, cfg.eps);
  AdamState adam_v(pair.v.param_count(), cfg.beta1, cfg.beta2, cfg.eps);
  FitTrace& trace = result.trace;
  trace.steps.reserve(cfg.steps);

  Matrix target;
  for (std::size_t s = 1; s <= cfg.steps; ++s) {
    try {
      LayerRotation rot(pair, prob.w, prob.h, true);
      const std::vector<double> wbar = normalized_weights(rot.h_rot());
      const bool refresh = cfg.refresh == 1 || s % cfg.refresh == 1;
      if (refresh) {
        target = quantizer(rot.w_rot());
        ++trace.quantizer_calls;
      }
      FitEvaluation ev = evaluate_rotated(rot, target, wbar, cfg.lambda_bd, block, true);
      if (!std::isfinite(ev.loss.l_fit)) fail(Errc::non_finite, "fitting loss is not finite");
      trace.steps.push_back(FitStep{s, ev.loss.l_diag, ev.loss.r_bd, ev.loss.l_fit, refresh});
      adam_u.step(pair.u.theta(), ev.grads.u, cfg.lr);
      adam_v.step(pair.v.theta(), ev.grads.v, cfg.lr);
    } catch (const Error& e) {
      throw Error(e.code(), "fit step " + std::to_string(s) + ": " + e.message());
    }
  }
  return result;
}

}  // namespace harp
