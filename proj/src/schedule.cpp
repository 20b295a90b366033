#include "harp/schedule.hpp"

#include <algorithm>
#include <string>

#include "harp/error.hpp"

namespace harp {

std::string_view violation_name(ScheduleViolation v) {
  switch (v) {
    case ScheduleViolation::empty: return "empty";
    case ScheduleViolation::radix_too_small: return "radix-too-small";
    case ScheduleViolation::product_mismatch: return "product-mismatch";
    case ScheduleViolation::stride_mismatch: return "stride-mismatch";
    case ScheduleViolation::block_mismatch: return "block-mismatch";
  }
  return "unknown";
}

std::optional<ScheduleViolation> validate(const Schedule& s) {
  if (s.radices.empty()) return ScheduleViolation::empty;
  for (std::size_t b : s.radices)
    if (b < 2) return ScheduleViolation::radix_too_small;

  std::size_t product = 1;
  for (std::size_t b : s.radices) {
    if (product > s.dim) return ScheduleViolation::product_mismatch;
    product *= b;
  }
  if (product != s.dim) return ScheduleViolation::product_mismatch;

  if (s.strides.size() != s.radices.size()) return ScheduleViolation::stride_mismatch;
  std::size_t stride = 1;
  for (std::size_t t = 0; t < s.radices.size(); ++t) {
    if (s.strides[t] != stride) return ScheduleViolation::stride_mismatch;
    stride *= s.radices[t];
  }

  if (s.blocks.size() != s.radices.size()) return ScheduleViolation::block_mismatch;
  for (std::size_t t = 0; t < s.radices.size(); ++t)
    if (s.blocks[t] * s.radices[t] != s.dim) return ScheduleViolation::block_mismatch;
  return std::nullopt;
}

Schedule make_schedule(std::size_t dim, std::vector<std::size_t> radices) {
  Schedule s;
  s.dim = dim;
  s.radices = std::move(radices);
  std::size_t stride = 1;
  for (std::size_t b : s.radices) {
    s.strides.push_back(stride);
    s.blocks.push_back(b == 0 ? 0 : dim / b);
    stride *= b;
  }
  if (auto v = validate(s)) {
    fail(Errc::invalid_dimension,
         "schedule for d=" + std::to_string(dim) + " violates " + std::string(violation_name(*v)));
  }
  for (std::size_t b : s.radices)
    if (b > 64) warn("radix " + std::to_string(b) + " exceeds 64; the block kernels will be dense and costly");
  return s;
}

Schedule greedy_schedule(std::size_t dim, std::size_t base_radix, std::size_t max_radix) {
  if (dim < 2) fail(Errc::invalid_dimension, "greedy_schedule requires d >= 2");
  if (base_radix < 2 || base_radix > max_radix) {
    fail(Errc::invalid_input, "greedy_schedule requires 2 <= base <= max radix");
  }
  std::vector<std::size_t> radices;
  std::size_t r = dim;
  while (r % base_radix == 0) {
    radices.push_back(base_radix);
    r /= base_radix;
  }
  for (std::size_t f = std::min(max_radix, r); f >= 2; --f) {
    while (r % f == 0) {
      radices.push_back(f);
      r /= f;
    }
  }
  if (r != 1) radices.push_back(r);
  return make_schedule(dim, std::move(radices));
}

std::size_t param_count(const Schedule& s, std::size_t passes) {
  std::size_t total = 0;
  for (std::size_t t = 0; t < s.stages(); ++t) total += s.blocks[t] * block_param_count(s.radices[t]);
  return passes * total;
}

std::size_t multiply_count(const Schedule& s) {
  std::size_t total = 0;
  for (std::size_t b : s.radices) total += s.dim * b;
  return total;
}

}  // namespace harp
