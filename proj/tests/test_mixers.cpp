#include <cmath>

#include "harp/mixers.hpp"
#include "helpers.hpp"

using namespace harp;
using harp::test::error_code;
using harp::test::near;

TEST_CASE("sylvester hadamard") {
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(near(sylvester_hadamard(2).matrix, Matrix::from_rows({{r, r}, {r, -r}}), 1e-16));
  CHECK(near(sylvester_hadamard(4).matrix,
             0.5 * Matrix::from_rows({{1, 1, 1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, 1}}), 1e-16));
  CHECK(sylvester_hadamard(1).matrix == Matrix::identity(1));
  CHECK(sylvester_hadamard(8).kind == MixerKind::hadamard);
  CHECK(error_code([] { sylvester_hadamard(6); }) == Errc::invalid_radix);

  for (std::size_t k = 1; k <= 64; k *= 2) {
    const Matrix h2k = sylvester_hadamard(2 * k).matrix;
    const Matrix hk = sylvester_hadamard(k).matrix;
    const Matrix block = (1.0 / std::sqrt(2.0)) * kron(Matrix::from_rows({{1, 1}, {1, -1}}), hk);
    CHECK(near(h2k, block, 1e-15));
    CHECK(orthogonality_residual(h2k) <= 1e-12);
  }
}

TEST_CASE("fallback mixers") {
  const BaseMixer a = fallback_mixer(5, SeededRng{11});
  CHECK(a.kind == MixerKind::qr_fallback);
  CHECK(orthogonality_residual(a.matrix) <= 1e-12);
  CHECK(a.matrix == fallback_mixer(5, SeededRng{11}).matrix);
  CHECK(orthogonality_residual(fallback_mixer(3, SeededRng{1}).matrix) <= 1e-12);
  CHECK(max_abs_diff(fallback_mixer(6, SeededRng{1}).matrix, fallback_mixer(6, SeededRng{2}).matrix) > 1e-3);
  CHECK(error_code([] { fallback_mixer(8, SeededRng{1}); }) == Errc::invalid_radix);

  // Shared across layers: the default is a pure function of b.
  CHECK(default_fallback_seed(3).seed == 0x902a803728a6506fULL);
  CHECK(default_mixer(3).matrix == fallback_mixer(3, default_fallback_seed(3)).matrix);
  CHECK(default_mixer(8).kind == MixerKind::hadamard);
  CHECK(default_mixer(12).kind == MixerKind::qr_fallback);
  for (std::size_t b = 1; b <= 64; ++b) CHECK(orthogonality_residual(default_mixer(b).matrix) <= 1e-12);
}

TEST_CASE("identity mixer and rebuild from kind") {
  CHECK(identity_mixer(4).matrix == Matrix::identity(4));
  for (std::size_t b : {2, 3, 5, 8}) {
    const BaseMixer m = default_mixer(b);
    CHECK(mixer_from_kind(b, m.kind, m.seed).matrix == m.matrix);
  }
}

TEST_CASE("sign tables") {
  CHECK(sign_table(1).entries == std::vector<std::int8_t>{1});
  CHECK(sign_table(2).entries == std::vector<std::int8_t>{1, 1, 1, -1});
  for (std::size_t k : supported_table_orders()) {
    const SignTable t = sign_table(k);
    CHECK(t.order == k);
    CHECK(verify_sign_table(t));
    CHECK(orthogonality_residual(t.normalized()) <= 1e-12);
  }
  // Independent integer check for the Paley order-12 table.
  const SignTable t = sign_table(12);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) {
      long dot = 0;
      for (std::size_t k = 0; k < 12; ++k) dot += t(i, k) * t(j, k);
      CHECK(dot == (i == j ? 12 : 0));
    }
  for (std::size_t k : {3, 5, 6, 16, 24}) CHECK(error_code([k] { sign_table(k); }) == Errc::no_table_available);

  SignTable broken = sign_table(4);
  broken.entries[5] = -broken.entries[5];
  CHECK_FALSE(verify_sign_table(broken));
}
