#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "harp/transform.hpp"

namespace harp {

/// Int8 form of a processor: one float32 scale per learnable block and the
/// block's parameters as int8 in (pass, stage, block, triangle-index) order.
struct PackedProcessor {
  HarpProcessor structure;  // schedule, mixers, signs; theta all zero
  std::vector<float> scales;
  std::vector<std::int8_t> q;

  std::size_t block_count() const noexcept { return scales.size(); }
  /// Throws format-error when the payload does not match the structure.
  void validate() const;
};

/// s = max|a| / 127 per block (0 for all-zero blocks), q = rne(a / s)
/// clamped to [-127, 127].
PackedProcessor pack_int8(const HarpProcessor& p);

/// theta = s * q.
HarpProcessor unpack(const PackedProcessor& pp);

/// Per-block scale and codes for a single parameter vector.
float block_scale(std::span<const double> a);
void quantize_block(std::span<const double> a, float scale, std::span<std::int8_t> out);

struct StorageBits {
  std::uint64_t payload = 0;  // learnable parameters
  std::uint64_t signs = 0;    // one bit per coordinate
  std::uint64_t scales = 0;   // int8 scales

  std::uint64_t total() const noexcept { return payload + signs + scales; }
};

/// Float32 parameters.
StorageBits storage_bits(const HarpProcessor& p);
StorageBits storage_bits(const PackedProcessor& pp);

/// base_bits + (U bits + V bits) / (d_out d_in). Signs are counted as
/// metadata, so an unlearned RHT reports slightly above base_bits.
double overhead_bpp(const StorageBits& u, const StorageBits& v, std::size_t d_out, std::size_t d_in,
                    double base_bits);
double overhead_bpp(const ProcessorPair& pair, double base_bits);

}  // namespace harp
