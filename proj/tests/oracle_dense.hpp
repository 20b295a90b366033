#pragma once

// Dense reference construction of a processor, written independently of the
// strided engine: every stage becomes an explicit d x d matrix.

#include "harp/transform.hpp"

namespace harp::test {

/// Column-convention stage matrix S with S[(a, r, b), (a, r', b)] = B_c[r][r'],
/// c = a * stride + b.
inline Matrix dense_stage(const HarpProcessor& p, std::size_t pass, std::size_t t) {
  const Schedule& s = p.schedule();
  const std::size_t d = s.dim, b = s.radices[t], st = s.strides[t], g = s.groups(t);
  Matrix out(d, d);
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t beta = 0; beta < st; ++beta) {
      const std::size_t c = a * st + beta;
      const Matrix k = block_kernel(p.block(pass, t, c), p.mixer(t));
      for (std::size_t r = 0; r < b; ++r)
        for (std::size_t r2 = 0; r2 < b; ++r2) out(a * b * st + r * st + beta, a * b * st + r2 * st + beta) = k(r, r2);
    }
  return out;
}

/// Column-convention T = S_{m-1} ... S_0 over all passes (inner transform only).
inline Matrix dense_inner(const HarpProcessor& p) {
  Matrix t = Matrix::identity(p.inner_dim());
  for (std::size_t pass = 0; pass < p.passes(); ++pass)
    for (std::size_t s = 0; s < p.schedule().stages(); ++s) t = matmul(dense_stage(p, pass, s), t);
  return t;
}

/// Row-convention M with apply(p, x) = x M: diag(signs) (H_K (x) T)^T.
inline Matrix dense_processor(const HarpProcessor& p) {
  Matrix t = dense_inner(p);
  if (p.mode() == ProcessorMode::kronecker) t = kron(sign_table(p.kron_order()).normalized(), t);
  Matrix m = t.transpose();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) *= p.signs()[i];
  return m;
}

inline void randomize(HarpProcessor& p, std::uint64_t seed, double scale = 0.5) {
  RngStream s(SeededRng{seed});
  for (double& v : p.theta()) v = scale * s.gaussian();
}

}  // namespace harp::test
