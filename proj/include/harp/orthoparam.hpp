#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "harp/mixers.hpp"
#include "harp/numerics.hpp"

namespace harp {

/// Unconstrained parameters of one block rotation. For radix 2 this is the
/// Givens angle; otherwise the strict upper triangle of the skew generator A
/// in row-major order: (0,1), (0,2), ..., (0,b-1), (1,2), ...
struct BlockParams {
  std::size_t radix = 0;
  std::vector<double> theta;

  static BlockParams zero(std::size_t radix);
  bool is_zero() const;
};

Matrix givens(double theta);

/// Skew-symmetric A with A_ij = theta_k (i < j).
Matrix skew_from_triangle(std::size_t b, std::span<const double> theta);

/// Forward products of the Cayley map kept for the reverse pass.
struct CayleyCache {
  Matrix q;
  std::optional<LuFactor> lu;  // LU of (I + A); absent at theta = 0
};

/// Q = (I + A)^{-1} (I - A). theta = 0 returns I exactly without a solve.
Matrix cayley(std::size_t b, std::span<const double> theta, CayleyCache* cache = nullptr);
Matrix cayley(const BlockParams& params);

/// Learnable rotation Q(theta) in SO(b): Givens for b = 2, Cayley above.
Matrix block_rotation(std::size_t b, std::span<const double> theta, CayleyCache* cache = nullptr);

/// B = Q(theta) G.
Matrix block_kernel(const BlockParams& params, const BaseMixer& mixer);
Matrix block_kernel(std::size_t b, std::span<const double> theta, const BaseMixer& mixer,
                    CayleyCache* cache = nullptr);

/// Gradient of <upstream, B(theta)> with respect to theta. A cache from the
/// forward pass avoids refactoring (I + A).
std::vector<double> block_kernel_adjoint(const BlockParams& params, const BaseMixer& mixer,
                                         const Matrix& upstream);
void block_kernel_adjoint(std::size_t b, std::span<const double> theta, const BaseMixer& mixer,
                          const Matrix& upstream, const CayleyCache* cache, std::span<double> grad_out);

}  // namespace harp
