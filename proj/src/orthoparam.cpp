#include "harp/orthoparam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "harp/error.hpp"
#include "harp/schedule.hpp"

namespace harp {

BlockParams BlockParams::zero(std::size_t radix) {
  if (radix < 2) fail(Errc::invalid_radix, "block radix must be >= 2");
  return BlockParams{radix, std::vector<double>(block_param_count(radix), 0.0)};
}

bool BlockParams::is_zero() const {
  return std::all_of(theta.begin(), theta.end(), [](double v) { return v == 0.0; });
}

Matrix givens(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return Matrix::from_rows({{c, -s}, {s, c}});
}

Matrix skew_from_triangle(std::size_t b, std::span<const double> theta) {
  if (theta.size() != block_param_count(b)) {
    fail(Errc::invalid_input, "expected " + std::to_string(block_param_count(b)) + " generator entries for radix " +
                                  std::to_string(b) + ", got " + std::to_string(theta.size()));
  }
  Matrix a(b, b);
  std::size_t k = 0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j, ++k) {
      a(i, j) = theta[k];
      a(j, i) = -theta[k];
    }
  }
  return a;
}

Matrix cayley(std::size_t b, std::span<const double> theta, CayleyCache* cache) {
  const bool zero = std::all_of(theta.begin(), theta.end(), [](double v) { return v == 0.0; });
  if (zero) {
    if (theta.size() != block_param_count(b)) fail(Errc::invalid_input, "Cayley parameter length mismatch");
    Matrix eye = Matrix::identity(b);
    if (cache) *cache = CayleyCache{eye, std::nullopt};
    return eye;
  }
  const Matrix a = skew_from_triangle(b, theta);
  const Matrix eye = Matrix::identity(b);
  LuFactor lu(eye + a);
  Matrix q = lu.solve(eye - a);
  if (cache) *cache = CayleyCache{q, std::move(lu)};
  return q;
}

Matrix cayley(const BlockParams& params) {
  if (params.radix <= 2) fail(Errc::invalid_radix, "the Cayley map is used for radix > 2");
  return cayley(params.radix, params.theta);
}

Matrix block_rotation(std::size_t b, std::span<const double> theta, CayleyCache* cache) {
  if (b == 2) {
    if (theta.size() != 1) fail(Errc::invalid_input, "Givens block takes one angle");
    return givens(theta[0]);
  }
  return cayley(b, theta, cache);
}

Matrix block_kernel(std::size_t b, std::span<const double> theta, const BaseMixer& mixer, CayleyCache* cache) {
  if (mixer.size != b) {
    fail(Errc::invalid_input, "mixer size " + std::to_string(mixer.size) + " does not match radix " + std::to_string(b));
  }
  const bool zero = std::all_of(theta.begin(), theta.end(), [](double v) { return v == 0.0; });
  if (zero && b > 2) {
    // Q(0) = I exactly, so B(0) = G bit for bit.
    if (cache) *cache = CayleyCache{Matrix::identity(b), std::nullopt};
    return mixer.matrix;
  }
  if (zero) return mixer.matrix;
  return matmul(block_rotation(b, theta, cache), mixer.matrix);
}

Matrix block_kernel(const BlockParams& params, const BaseMixer& mixer) {
  return block_kernel(params.radix, params.theta, mixer);
}

void block_kernel_adjoint(std::size_t b, std::span<const double> theta, const BaseMixer& mixer,
                          const Matrix& upstream, const CayleyCache* cache, std::span<double> grad_out) {
  if (mixer.size != b || upstream.rows() != b || upstream.cols() != b || grad_out.size() != theta.size()) {
    fail(Errc::invalid_input, "block adjoint shape mismatch");
  }
  // dL = <U, dQ G> = <U G^T, dQ>.
  const Matrix gq = matmul(upstream, mixer.matrix.transpose());

  if (b == 2) {
    const double c = std::cos(theta[0]);
    const double s = std::sin(theta[0]);
    grad_out[0] = gq(0, 0) * -s + gq(0, 1) * -c + gq(1, 0) * c + gq(1, 1) * -s;
    return;
  }

  // dQ = -(I + A)^{-1} dA (I + Q), so dL/dA = -(I + A)^{-T} GQ (I + Q)^T.
  CayleyCache local;
  if (!cache) {
    cayley(b, theta, &local);
    cache = &local;
  }
  const Matrix eye = Matrix::identity(b);
  Matrix solved = cache->lu ? cache->lu->solve_transpose(gq) : gq;  // (I + 0)^{-T} = I
  Matrix z = matmul(solved, (eye + cache->q).transpose());
  std::size_t k = 0;
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = i + 1; j < b; ++j, ++k) grad_out[k] = -(z(i, j) - z(j, i));
}

std::vector<double> block_kernel_adjoint(const BlockParams& params, const BaseMixer& mixer, const Matrix& upstream) {
  std::vector<double> grad(params.theta.size());
  block_kernel_adjoint(params.radix, params.theta, mixer, upstream, nullptr, grad);
  return grad;
}

}  // namespace harp
