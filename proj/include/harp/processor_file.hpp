#pragma once

// "HRP1" processor container, all integers little-endian:
//
//   4   magic "HRP1"
//   u8  mode (0 mixed-radix, 1 kronecker)
//   u64 K                      kronecker mode only
//   u64 d                      full dimension (K * inner in kronecker mode)
//   u64 passes
//   u64 m                      stage count
//   m x u64 radices            product = d / K
//   u64 sign seed
//   ceil(d/8) bytes            sign bits, LSB first; a set bit means -1
//   m x (u8 kind, u64 seed)    base mixer per stage
//   u8  payload kind (0 float32, 1 int8 + scales)
//   payload:
//     float32: param_count x f32 in (pass, stage, block, triangle-index) order
//     int8:    per block in the same order, f32 scale then its int8 codes

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "harp/packing.hpp"
#include "harp/transform.hpp"

namespace harp {

enum class PayloadKind : std::uint8_t { float32 = 0, int8 = 1 };

std::vector<std::uint8_t> encode_processor(const HarpProcessor& p);
std::vector<std::uint8_t> encode_processor(const PackedProcessor& pp);

struct DecodedProcessor {
  PayloadKind payload = PayloadKind::float32;
  HarpProcessor processor;                // unpacked when the payload is int8
  std::optional<PackedProcessor> packed;  // int8 payloads only
};

/// Throws format-error (with the byte offset) on any malformed input.
DecodedProcessor decode_processor(std::span<const std::uint8_t> bytes);

void write_processor_file(const std::filesystem::path& path, const HarpProcessor& p);
void write_processor_file(const std::filesystem::path& path, const PackedProcessor& pp);
DecodedProcessor read_processor_file(const std::filesystem::path& path);

}  // namespace harp
