#include "harp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "harp/error.hpp"

namespace harp {

double mu_w(const Matrix& a) {
  const double fro = a.frobenius();
  if (a.size() == 0 || fro == 0.0) fail(Errc::undefined_metric, "weight incoherence of a zero matrix");
  return std::sqrt(static_cast<double>(a.rows() * a.cols())) * a.max_abs() / fro;
}

HessianIncoherence mu_h(const Matrix& h) {
  if (h.size() == 0 || h.max_abs() == 0.0) fail(Errc::undefined_metric, "Hessian incoherence of a zero matrix");
  const SymEig eig = sym_eig(h);
  HessianIncoherence out;
  out.value = std::sqrt(static_cast<double>(h.rows())) * eig.vectors.max_abs();
  const double scale = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  for (std::size_t k = 0; k + 1 < eig.values.size(); ++k)
    if (std::abs(eig.values[k] - eig.values[k + 1]) < 1e-9 * scale) out.degenerate = true;
  return out;
}

double offblock_fraction(const Matrix& h_rot, std::size_t block) {
  if (!h_rot.square()) fail(Errc::invalid_input, "off-block fraction needs a square matrix");
  if (block == 0 || h_rot.rows() % block != 0) {
    fail(Errc::invalid_block, "block " + std::to_string(block) + " does not divide " + std::to_string(h_rot.rows()));
  }
  double off = 0.0, total = 0.0;
  for (std::size_t i = 0; i < h_rot.rows(); ++i) {
    for (std::size_t j = 0; j < h_rot.cols(); ++j) {
      const double e = h_rot(i, j) * h_rot(i, j);
      total += e;
      if (i / block != j / block) off += e;
    }
  }
  return total == 0.0 ? 0.0 : off / total;
}

double proxy_loss(const Matrix& w, const Matrix& w_hat, const Matrix& h) {
  if (w.rows() != w_hat.rows() || w.cols() != w_hat.cols() || h.rows() != w.cols() || h.cols() != w.cols()) {
    fail(Errc::invalid_input, "proxy_loss shape mismatch");
  }
  const Matrix delta = w - w_hat;
  const Matrix dh = matmul(delta, h);
  double acc = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) acc += dh.storage()[i] * delta.storage()[i];
  return acc;
}

double invariance_check(const ProcessorPair& pair, const Matrix& w, const Matrix& h, const Matrix& w_hat_rot) {
  const LayerProblem prob{w, h};
  const RotatedLayer rot = rotate_layer(pair, prob);
  const double rotated = proxy_loss(rot.w, w_hat_rot, rot.h);
  const double original = proxy_loss(w, unrotate_weight(pair, w_hat_rot), h);
  return std::abs(rotated - original) / std::max(1e-12, original);
}

namespace {

std::string describe(const ProcessorPair& pair) {
  auto side = [](const HarpProcessor& p) {
    std::ostringstream os;
    os << mode_name(p.mode());
    if (p.mode() == ProcessorMode::kronecker) os << "[K=" << p.kron_order() << "]";
    os << '(';
    for (std::size_t t = 0; t < p.schedule().stages(); ++t) os << (t ? "x" : "") << p.schedule().radices[t];
    os << ')' << (p.is_zero() ? "@0" : "@fit");
    return os.str();
  };
  return "U=" + side(pair.u) + " V=" + side(pair.v);
}

}  // namespace

DiagnosticsReport run_battery(const LayerProblem& prob, const ProcessorPair& pair, const Quantizer& quantizer,
                              std::optional<std::size_t> block) {
  const RotatedLayer rot = rotate_layer(pair, prob);
  const Matrix w_hat_rot = quantizer(rot.w);
  const std::size_t g = block ? *block : quantizer.block_size(prob.d_in());

  DiagnosticsReport r;
  r.processor_label = describe(pair);
  r.quantizer_label = quantizer.spec().to_string();
  r.mu_w_pre = mu_w(rot.w);
  r.mu_w_post = w_hat_rot.max_abs() == 0.0 ? 0.0 : mu_w(w_hat_rot);
  const auto muh = mu_h(rot.h);
  r.mu_h = muh.value;
  r.mu_h_degenerate = muh.degenerate;
  r.offblock_fraction = offblock_fraction(rot.h, g);
  r.l_diag = loss_diag(rot.w, w_hat_rot, normalized_weights(rot.h));
  r.proxy_loss = proxy_loss(rot.w, w_hat_rot, rot.h);
  return r;
}

std::string report_csv_header() {
  return "processor,quantizer,mu_w_pre,mu_w_post,mu_h,mu_h_degenerate,offblock_fraction,l_diag,proxy_loss";
}

std::string report_csv_row(const DiagnosticsReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << '"' << r.processor_label << "\",\"" << r.quantizer_label << "\"," << r.mu_w_pre << ',' << r.mu_w_post << ','
     << r.mu_h << ',' << (r.mu_h_degenerate ? 1 : 0) << ',' << r.offblock_fraction << ',' << r.l_diag << ','
     << r.proxy_loss;
  return os.str();
}

std::string report_table(std::span<const DiagnosticsReport> reports) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-44s %10s %10s %10s %10s %12s %12s\n", "processor", "muW_pre", "muW_post",
                "muH", "offblk", "L_diag", "proxy");
  os << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-44s %10.4f %10.4f %9.4f%s %10.4f %12.5g %12.5g\n",
                  r.processor_label.substr(0, 44).c_str(), r.mu_w_pre, r.mu_w_post, r.mu_h,
                  r.mu_h_degenerate ? "*" : " ", r.offblock_fraction, r.l_diag, r.proxy_loss);
    os << line;
  }
  return os.str();
}

DiagnosticsReport aggregate(std::span<const DiagnosticsReport> reports) {
  DiagnosticsReport mean;
  if (reports.empty()) return mean;
  mean.processor_label = reports.front().processor_label;
  mean.quantizer_label = reports.front().quantizer_label;
  for (const auto& r : reports) {
    mean.mu_w_pre += r.mu_w_pre;
    mean.mu_w_post += r.mu_w_post;
    mean.mu_h += r.mu_h;
    mean.mu_h_degenerate = mean.mu_h_degenerate || r.mu_h_degenerate;
    mean.offblock_fraction += r.offblock_fraction;
    mean.l_diag += r.l_diag;
    mean.proxy_loss += r.proxy_loss;
  }
  const double n = static_cast<double>(reports.size());
  mean.mu_w_pre /= n;
  mean.mu_w_post /= n;
  mean.mu_h /= n;
  mean.offblock_fraction /= n;
  mean.l_diag /= n;
  mean.proxy_loss /= n;
  return mean;
}

}  // namespace harp
