#include "harp/packing.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>

#include "harp/error.hpp"

namespace harp {

namespace {

// Visits every learnable block as (offset, length).
template <class F>
void for_each_block(const HarpProcessor& p, F&& f) {
  const Schedule& s = p.schedule();
  for (std::size_t pass = 0; pass < p.passes(); ++pass)
    for (std::size_t t = 0; t < s.stages(); ++t)
      for (std::size_t c = 0; c < s.blocks[t]; ++c) f(p.block_offset(pass, t, c), block_param_count(s.radices[t]));
}

std::size_t total_blocks(const HarpProcessor& p) {
  std::size_t n = 0;
  for (std::size_t b : p.schedule().blocks) n += b;
  return n * p.passes();
}

}  // namespace

float block_scale(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return static_cast<float>(m / 127.0);
}

void quantize_block(std::span<const double> a, float scale, std::span<std::int8_t> out) {
  if (scale == 0.0f) {
    std::fill(out.begin(), out.end(), std::int8_t{0});
    return;
  }
  const int prev = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double s = scale;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = std::clamp(std::nearbyint(a[i] / s), -127.0, 127.0);
    out[i] = static_cast<std::int8_t>(r);
  }
  std::fesetround(prev);
}

void PackedProcessor::validate() const {
  if (!structure.is_zero()) fail(Errc::format_error, "packed structure carries nonzero parameters");
  if (scales.size() != total_blocks(structure)) {
    fail(Errc::format_error, "packed processor has " + std::to_string(scales.size()) + " scales, expected " +
                                 std::to_string(total_blocks(structure)));
  }
  if (q.size() != structure.param_count()) {
    fail(Errc::format_error, "packed processor has " + std::to_string(q.size()) + " codes, expected " +
                                 std::to_string(structure.param_count()));
  }
  for (float s : scales)
    if (!(s >= 0.0f) || !std::isfinite(s)) fail(Errc::format_error, "packed scale is negative or not finite");
  for (std::int8_t v : q)
    if (v == -128) fail(Errc::format_error, "packed code -128 outside [-127, 127]");
}

PackedProcessor pack_int8(const HarpProcessor& p) {
  PackedProcessor pp;
  pp.structure = p;
  pp.structure.set_zero();
  pp.q.assign(p.param_count(), 0);
  pp.scales.reserve(total_blocks(p));
  const auto theta = p.theta();
  for_each_block(p, [&](std::size_t off, std::size_t len) {
    const auto a = theta.subspan(off, len);
    const float s = block_scale(a);
    pp.scales.push_back(s);
    quantize_block(a, s, std::span(pp.q).subspan(off, len));
  });
  return pp;
}

HarpProcessor unpack(const PackedProcessor& pp) {
  pp.validate();
  HarpProcessor p = pp.structure;
  auto theta = p.theta();
  std::size_t k = 0;
  for_each_block(p, [&](std::size_t off, std::size_t len) {
    const double s = pp.scales[k++];
    for (std::size_t i = off; i < off + len; ++i) theta[i] = s * static_cast<double>(pp.q[i]);
  });
  return p;
}

StorageBits storage_bits(const HarpProcessor& p) {
  StorageBits b;
  b.payload = 32ull * p.param_count();
  b.signs = p.dim();
  return b;
}

StorageBits storage_bits(const PackedProcessor& pp) {
  StorageBits b;
  b.payload = 8ull * pp.q.size();
  b.signs = pp.structure.dim();
  b.scales = 32ull * pp.scales.size();
  return b;
}

double overhead_bpp(const StorageBits& u, const StorageBits& v, std::size_t d_out, std::size_t d_in,
                    double base_bits) {
  if (d_out == 0 || d_in == 0) fail(Errc::invalid_dimension, "overhead_bpp needs positive layer dimensions");
  return base_bits + static_cast<double>(u.total() + v.total()) / (static_cast<double>(d_out) * d_in);
}

double overhead_bpp(const ProcessorPair& pair, double base_bits) {
  return overhead_bpp(storage_bits(pair.u), storage_bits(pair.v), pair.u.dim(), pair.v.dim(), base_bits);
}

}  // namespace harp
