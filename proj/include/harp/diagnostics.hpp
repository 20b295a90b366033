#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "harp/fitting.hpp"
#include "harp/numerics.hpp"
#include "harp/quantizers.hpp"
#include "harp/transform.hpp"

namespace harp {

/// sqrt(mn) * max|A_ij| / ||A||_F. Throws undefined-metric for A = 0.
double mu_w(const Matrix& a);

struct HessianIncoherence {
  double value = 0.0;
  /// Adjacent eigenvalues closer than 1e-9 relative: the eigenbasis and
  /// therefore the score depend on the eigensolver.
  bool degenerate = false;
};

/// sqrt(n) * max|Q_ij| for H = Q diag(lambda) Q^T.
HessianIncoherence mu_h(const Matrix& h);

/// Fraction of squared mass outside the contiguous g x g diagonal blocks.
double offblock_fraction(const Matrix& h_rot, std::size_t block);

/// Tr((W - W_hat) H (W - W_hat)^T).
double proxy_loss(const Matrix& w, const Matrix& w_hat, const Matrix& h);

/// |rotated-basis loss - original-basis loss| / max(1e-12, original-basis
/// loss) for a candidate quantized weight expressed in the rotated basis.
double invariance_check(const ProcessorPair& pair, const Matrix& w, const Matrix& h, const Matrix& w_hat_rot);

struct DiagnosticsReport {
  std::string processor_label;
  std::string quantizer_label;
  double mu_w_pre = 0.0;
  double mu_w_post = 0.0;
  double mu_h = 0.0;
  bool mu_h_degenerate = false;
  double offblock_fraction = 0.0;
  double l_diag = 0.0;
  double proxy_loss = 0.0;
};

/// All metrics from one rotation pass. `block` defaults to the quantizer's
/// block length along the input dimension.
DiagnosticsReport run_battery(const LayerProblem& prob, const ProcessorPair& pair, const Quantizer& quantizer,
                              std::optional<std::size_t> block = std::nullopt);

std::string report_csv_header();
std::string report_csv_row(const DiagnosticsReport& r);
/// Fixed-width table for terminals.
std::string report_table(std::span<const DiagnosticsReport> reports);
/// Mean of every metric over layers; labels from the first report.
DiagnosticsReport aggregate(std::span<const DiagnosticsReport> reports);

}  // namespace harp
