#include "harp/quantizers.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <limits>
#include <sstream>

#include "harp/error.hpp"

namespace harp {

namespace {

double round_half_even(double x) {
  // nearbyint honours the current rounding mode; pin it to nearest-even.
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(x);
  std::fesetround(saved);
  return r;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size() || value.empty()) fail(Errc::invalid_input, "quantizer key '" + key + "' expects an integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string QuantizerSpec::to_string() const {
  std::ostringstream os;
  if (kind == QuantizerKind::scalar_rtn) {
    os << "scalar:bits=" << bits << ",group=" << group;
  } else {
    os << "vq:bits=" << bits << ",dim=" << vq_dim << ",seed=" << codebook_seed
       << ",scale=" << (per_row_scale ? "on" : "off");
  }
  return os.str();
}

QuantizerSpec QuantizerSpec::parse(const std::string& text) {
  QuantizerSpec spec;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (head == "scalar") {
    spec.kind = QuantizerKind::scalar_rtn;
  } else if (head == "vq") {
    spec.kind = QuantizerKind::codebook_vq;
  } else {
    fail(Errc::invalid_input, "unknown quantizer kind '" + head + "'");
  }
  if (colon == std::string::npos) return spec;
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(Errc::invalid_input, "quantizer option '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "bits") {
      spec.bits = static_cast<int>(parse_count(key, value));
    } else if (key == "group" && spec.kind == QuantizerKind::scalar_rtn) {
      spec.group = parse_count(key, value);
    } else if (key == "dim" && spec.kind == QuantizerKind::codebook_vq) {
      spec.vq_dim = parse_count(key, value);
    } else if (key == "seed" && spec.kind == QuantizerKind::codebook_vq) {
      spec.codebook_seed = parse_count(key, value);
    } else if (key == "scale" && spec.kind == QuantizerKind::codebook_vq) {
      if (value != "on" && value != "off") fail(Errc::invalid_input, "scale must be on or off");
      spec.per_row_scale = value == "on";
    } else {
      fail(Errc::invalid_input, "unknown quantizer option '" + key + "' for " + head);
    }
  }
  if (spec.bits < 2 || spec.bits > 8) fail(Errc::invalid_input, "quantizer bits must be in 2..8");
  if (spec.group == 0 || spec.vq_dim == 0) fail(Errc::invalid_input, "block sizes must be positive");
  return spec;
}

Matrix quantize_scalar(const Matrix& w, int bits, std::size_t group) {
  if (bits < 2 || bits > 8) fail(Errc::invalid_input, "scalar quantizer bits must be in 2..8");
  if (group == 0 || w.cols() % group != 0) {
    fail(Errc::invalid_block, "group " + std::to_string(group) + " does not divide " + std::to_string(w.cols()) +
                                  " columns");
  }
  const double half = std::ldexp(1.0, bits - 1);
  const double qmin = -half;
  const double qmax = half - 1.0;
  Matrix out = w;
  for (std::size_t i = 0; i < w.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t start = 0; start < row.size(); start += group) {
      auto seg = row.subspan(start, group);
      double absmax = 0.0;
      for (double v : seg) absmax = std::max(absmax, std::abs(v));
      const double s = absmax == 0.0 ? 1.0 : absmax / half;
      for (double& v : seg) v = s * std::clamp(round_half_even(v / s), qmin, qmax);
    }
  }
  return out;
}

Codebook make_codebook(SeededRng seed, std::size_t dim, int bits) {
  if (dim == 0 || bits < 1) fail(Errc::invalid_input, "codebook needs positive dimension and bits");
  const std::size_t total_bits = dim * static_cast<std::size_t>(bits);
  if (total_bits > 12) {
    fail(Errc::too_large, "codebook of 2^" + std::to_string(total_bits) + " entries exceeds the 4096-entry budget");
  }
  Codebook cb;
  cb.dim = dim;
  cb.entries = std::size_t{1} << total_bits;
  RngStream stream(seed);
  cb.vectors.resize(cb.entries * dim);
  double energy = 0.0;
  for (double& v : cb.vectors) {
    v = stream.gaussian();
    energy += v * v;
  }
  const double scale = 1.0 / std::sqrt(energy / static_cast<double>(cb.vectors.size()));
  for (double& v : cb.vectors) v *= scale;
  return cb;
}

std::size_t nearest_codeword(const Codebook& cb, std::span<const double> segment) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < cb.entries; ++e) {
    const auto c = cb.codeword(e);
    double dist = 0.0;
    for (std::size_t j = 0; j < cb.dim; ++j) {
      const double diff = segment[j] - c[j];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = e;
    }
  }
  return best;
}

Matrix quantize_vq(const Matrix& w, const Codebook& cb, bool per_row_scale) {
  const std::size_t g = cb.dim;
  if (w.cols() % g != 0) {
    fail(Errc::invalid_block, "codeword length " + std::to_string(g) + " does not divide " +
                                  std::to_string(w.cols()) + " columns");
  }
  Matrix out(w.rows(), w.cols());
  std::vector<double> seg(g);
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const auto row = w.row(i);
    double norm = 1.0;
    if (per_row_scale) {
      double ms = 0.0;
      for (double v : row) ms += v * v;
      ms /= static_cast<double>(row.size());
      norm = ms > 0.0 ? std::sqrt(ms) : 1.0;
    }
    auto dst = out.row(i);
    for (std::size_t start = 0; start < row.size(); start += g) {
      for (std::size_t j = 0; j < g; ++j) seg[j] = row[start + j] / norm;
      const auto c = cb.codeword(nearest_codeword(cb, seg));
      std::copy(c.begin(), c.end(), dst.begin() + start);
    }
    if (per_row_scale) {
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        num += row[j] * dst[j];
        den += dst[j] * dst[j];
      }
      const double alpha = den > 0.0 ? num / den : 0.0;
      for (double& v : dst) v *= alpha;
    }
  }
  return out;
}

Quantizer::Quantizer(QuantizerSpec spec) : spec_(spec) {
  if (spec_.bits < 2 || spec_.bits > 8) fail(Errc::invalid_input, "quantizer bits must be in 2..8");
  if (spec_.kind == QuantizerKind::codebook_vq) {
    codebook_ = make_codebook(SeededRng{spec_.codebook_seed}, spec_.vq_dim, spec_.bits);
  }
}

std::size_t Quantizer::block_size(std::size_t cols) const {
  if (spec_.kind == QuantizerKind::codebook_vq) return spec_.vq_dim;
  return std::min(spec_.group, cols);
}

Matrix Quantizer::operator()(const Matrix& w) const {
  if (spec_.kind == QuantizerKind::codebook_vq) return quantize_vq(w, *codebook_, spec_.per_row_scale);
  return quantize_scalar(w, spec_.bits, block_size(w.cols()));
}

}  // namespace harp
