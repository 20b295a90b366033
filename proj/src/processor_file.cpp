#include "harp/processor_file.hpp"

#include <cmath>
#include <cstring>

#include "byte_io.hpp"
#include "harp/error.hpp"

namespace harp {

namespace {

constexpr char kMagic[4] = {'H', 'R', 'P', '1'};
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 32;
constexpr std::uint64_t kMaxStages = 64;
constexpr std::uint64_t kMaxPasses = 1024;

void write_header(detail::ByteWriter& w, const HarpProcessor& p) {
  w.bytes(kMagic, 4);
  w.u8(static_cast<std::uint8_t>(p.mode()));
  if (p.mode() == ProcessorMode::kronecker) w.u64(p.kron_order());
  const Schedule& s = p.schedule();
  w.u64(p.dim());
  w.u64(p.passes());
  w.u64(s.stages());
  for (std::size_t b : s.radices) w.u64(b);
  w.u64(p.sign_seed());
  std::vector<std::uint8_t> bits((p.dim() + 7) / 8, 0);
  for (std::size_t i = 0; i < p.dim(); ++i)
    if (p.signs()[i] < 0) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  w.bytes(bits.data(), bits.size());
  for (const BaseMixer& m : p.mixers()) {
    w.u8(static_cast<std::uint8_t>(m.kind));
    w.u64(m.seed);
  }
}

}  // namespace

std::vector<std::uint8_t> encode_processor(const HarpProcessor& p) {
  detail::ByteWriter w;
  write_header(w, p);
  w.u8(static_cast<std::uint8_t>(PayloadKind::float32));
  for (double v : p.theta()) w.f32(static_cast<float>(v));
  return w.take();
}

std::vector<std::uint8_t> encode_processor(const PackedProcessor& pp) {
  pp.validate();
  detail::ByteWriter w;
  const HarpProcessor& p = pp.structure;
  write_header(w, p);
  w.u8(static_cast<std::uint8_t>(PayloadKind::int8));
  const Schedule& s = p.schedule();
  std::size_t k = 0;
  for (std::size_t pass = 0; pass < p.passes(); ++pass) {
    for (std::size_t t = 0; t < s.stages(); ++t) {
      const std::size_t len = block_param_count(s.radices[t]);
      for (std::size_t c = 0; c < s.blocks[t]; ++c) {
        w.f32(pp.scales[k++]);
        w.bytes(pp.q.data() + p.block_offset(pass, t, c), len);
      }
    }
  }
  return w.take();
}

DecodedProcessor decode_processor(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "processor file");
  const auto magic = r.bytes(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    fail(Errc::format_error, "processor file at offset 0: bad magic (expected HRP1)");
  }
  const std::uint8_t mode_byte = r.u8("mode");
  if (mode_byte > 1) r.error("unknown mode " + std::to_string(mode_byte));
  const auto mode = static_cast<ProcessorMode>(mode_byte);
  std::uint64_t kron = 1;
  if (mode == ProcessorMode::kronecker) kron = r.u64("kronecker order");
  const std::uint64_t d = r.u64("dimension");
  const std::uint64_t passes = r.u64("passes");
  const std::uint64_t m = r.u64("stage count");
  if (d == 0 || d > kMaxDim) r.error("dimension " + std::to_string(d) + " out of range");
  if (kron == 0 || d % kron != 0) r.error("kronecker order " + std::to_string(kron) + " does not divide " + std::to_string(d));
  if (passes == 0 || passes > kMaxPasses) r.error("pass count " + std::to_string(passes) + " out of range");
  if (m == 0 || m > kMaxStages) r.error("stage count " + std::to_string(m) + " out of range");

  std::vector<std::size_t> radices(m);
  for (auto& b : radices) {
    const std::uint64_t v = r.u64("radix");
    if (v < 2 || v > kMaxDim) r.error("radix " + std::to_string(v) + " out of range");
    b = v;
  }
  const std::uint64_t sign_seed = r.u64("sign seed");
  const auto bits = r.bytes((d + 7) / 8, "sign bitfield");
  std::vector<std::int8_t> signs(d);
  for (std::size_t i = 0; i < d; ++i) signs[i] = (bits[i / 8] >> (i % 8)) & 1u ? -1 : 1;

  std::vector<BaseMixer> mixers;
  mixers.reserve(m);
  for (std::size_t t = 0; t < m; ++t) {
    const std::uint8_t kind = r.u8("mixer kind");
    const std::uint64_t seed = r.u64("mixer seed");
    if (kind > 2) r.error("unknown mixer kind " + std::to_string(kind));
    try {
      mixers.push_back(mixer_from_kind(radices[t], static_cast<MixerKind>(kind), seed));
    } catch (const Error& e) {
      r.error(std::string("stage ") + std::to_string(t) + " mixer: " + e.what());
    }
  }

  const std::size_t payload_offset = r.offset();
  const std::uint8_t payload = r.u8("payload kind");
  if (payload > 1) r.error("unknown payload kind " + std::to_string(payload));

  HarpProcessor p;
  try {
    Schedule sched = make_schedule(d / kron, radices);
    p = mode == ProcessorMode::kronecker
            ? HarpProcessor::zero_kronecker(std::move(sched), std::move(mixers), kron, std::move(signs), passes,
                                            sign_seed)
            : HarpProcessor::zero(std::move(sched), std::move(mixers), std::move(signs), passes, sign_seed);
  } catch (const Error& e) {
    fail(Errc::format_error, "processor file header (ending at offset " + std::to_string(payload_offset) +
                                 ") is inconsistent: " + e.what());
  }

  DecodedProcessor out;
  out.payload = static_cast<PayloadKind>(payload);
  if (out.payload == PayloadKind::float32) {
    r.need(4 * p.param_count(), "float32 payload");
    for (double& v : p.theta()) {
      const float f = r.f32("parameter");
      if (!std::isfinite(f)) r.error("non-finite parameter");
      v = f;
    }
    r.expect_end();
    out.processor = std::move(p);
    return out;
  }

  PackedProcessor pp;
  pp.structure = p;
  pp.q.assign(p.param_count(), 0);
  const Schedule& s = p.schedule();
  for (std::size_t pass = 0; pass < p.passes(); ++pass) {
    for (std::size_t t = 0; t < s.stages(); ++t) {
      const std::size_t len = block_param_count(s.radices[t]);
      for (std::size_t c = 0; c < s.blocks[t]; ++c) {
        const float scale = r.f32("block scale");
        if (!(scale >= 0.0f) || !std::isfinite(scale)) r.error("invalid block scale");
        pp.scales.push_back(scale);
        const auto codes = r.bytes(len, "block codes");
        std::memcpy(pp.q.data() + p.block_offset(pass, t, c), codes.data(), len);
      }
    }
  }
  r.expect_end();
  out.processor = unpack(pp);
  out.packed = std::move(pp);
  return out;
}

void write_processor_file(const std::filesystem::path& path, const HarpProcessor& p) {
  detail::write_file_bytes(path, encode_processor(p));
}

void write_processor_file(const std::filesystem::path& path, const PackedProcessor& pp) {
  detail::write_file_bytes(path, encode_processor(pp));
}

DecodedProcessor read_processor_file(const std::filesystem::path& path) {
  return decode_processor(detail::read_file_bytes(path));
}

}  // namespace harp
