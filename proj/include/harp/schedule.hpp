#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace harp {

/// Mixed-radix factorization of a dimension. Stage t mixes coordinates at
/// stride s_t = b_0 * ... * b_{t-1} in D_t = d / b_t blocks of size b_t.
struct Schedule {
  std::size_t dim = 0;
  std::vector<std::size_t> radices;
  std::vector<std::size_t> strides;
  std::vector<std::size_t> blocks;

  std::size_t stages() const noexcept { return radices.size(); }
  /// Number of outer groups g_t = d / (b_t s_t) at stage t.
  std::size_t groups(std::size_t t) const { return dim / (radices[t] * strides[t]); }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

enum class ScheduleViolation {
  empty,
  radix_too_small,
  product_mismatch,
  stride_mismatch,
  block_mismatch,
};

std::string_view violation_name(ScheduleViolation v);

/// Checks every Schedule invariant; returns the first violation found.
std::optional<ScheduleViolation> validate(const Schedule& s);

/// Builds a schedule from explicit radices, deriving strides and block
/// counts. Throws invalid-dimension if the radices do not form a valid
/// factorization of dim.
Schedule make_schedule(std::size_t dim, std::vector<std::size_t> radices);

/// Greedy mixed-radix construction: peel base_radix while it divides, then
/// factors from min(max_radix, r) down to 2, then any residual r > 1.
Schedule greedy_schedule(std::size_t dim, std::size_t base_radix = 8, std::size_t max_radix = 8);

/// Per-block learnable parameter count: 1 for a Givens block, b(b-1)/2 for a
/// Cayley block (the two agree at b = 2).
constexpr std::size_t block_param_count(std::size_t radix) noexcept {
  return radix * (radix - 1) / 2;
}

/// Learnable parameters of a processor on this schedule: passes * sum_t D_t b_t(b_t-1)/2.
std::size_t param_count(const Schedule& s, std::size_t passes = 1);

/// Multiplies for one application to a single vector: sum_t d * b_t.
std::size_t multiply_count(const Schedule& s);

}  // namespace harp
