#pragma once

// Internal staged-execution engine shared by transform and gradcore.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "harp/orthoparam.hpp"
#include "harp/transform.hpp"

namespace harp::detail {

struct StageKernels {
  std::size_t radix = 0;
  std::size_t stride = 0;
  std::size_t groups = 0;
  std::vector<double> blocks;       // D_t kernels, b x b row-major each
  std::vector<CayleyCache> caches;  // filled only when requested
};

StageKernels build_stage(const HarpProcessor& p, std::size_t pass, std::size_t stage, bool keep_caches);

/// In-place stage application to `rows` vectors of length `width` stored
/// contiguously. Returns the number of multiplies executed.
std::uint64_t stage_forward(const StageKernels& k, double* buf, std::size_t rows, std::size_t width,
                            bool transpose);

/// Mixes the K axis of each length K * n2 row with `table` (or its
/// transpose). Returns the number of multiplies executed.
std::uint64_t kron_mix(const Matrix& table, double* buf, std::size_t rows, std::size_t n2, bool transpose);

void scale_columns(Matrix& x, const std::vector<std::int8_t>& signs);

}  // namespace harp::detail
