#include <cmath>
#include <numbers>

#include "harp/numerics.hpp"
#include "helpers.hpp"

using namespace harp;
using harp::test::error_code;
using harp::test::near;

// Reference values come from tests/oracles/rng_oracle.py.

TEST_CASE("splitmix64 stream matches the reference generator") {
  RngStream s(SeededRng{0});
  CHECK(s.next_u64() == 0xe220a8397b1dcdafULL);
  CHECK(s.next_u64() == 0x6e789e6aa1b965f4ULL);
  CHECK(s.next_u64() == 0x06c45d188009454fULL);
  CHECK(s.counter() == 3);
}

TEST_CASE("uniforms and gaussians match the reference generator") {
  RngStream u(SeededRng{42});
  CHECK(u.uniform() == 0.7415648787718233);
  CHECK(u.uniform() == 0.1599103928769201);

  RngStream g(SeededRng{42});
  CHECK(g.gaussian() == doctest::Approx(0.4147197504315305).epsilon(1e-15));
  CHECK(g.gaussian() == doctest::Approx(0.6526812221519427).epsilon(1e-15));
  CHECK(g.gaussian() == doctest::Approx(-0.8918862136277562).epsilon(1e-15));
  CHECK(g.gaussian() == doctest::Approx(1.3268335628141064).epsilon(1e-15));
}

TEST_CASE("derive") {
  CHECK(SeededRng{1}.derive(0x55).seed == 0x8540a40d682931efULL);
  CHECK(SeededRng{1}.derive(0x55) != SeededRng{1}.derive(0x56));
}

TEST_CASE("rademacher") {
  const std::vector<std::int8_t> expect = {1, 1, -1, -1, 1, 1, 1, 1, 1, 1, 1, -1, -1, -1, -1, -1};
  CHECK(rademacher(SeededRng{7}, 16) == expect);
  CHECK(rademacher(SeededRng{7}, 4) == rademacher(SeededRng{7}, 4));

  const auto big = rademacher(SeededRng{2024}, 100000);
  long sum = 0;
  for (auto s : big) {
    REQUIRE((s == 1 || s == -1));
    sum += s;
  }
  CHECK(sum == -170);
  CHECK(std::abs(sum / 1e5) < 0.02);
}

TEST_CASE("matrix basics") {
  const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a.transpose()(2, 1) == 6);
  CHECK(matmul(a, a.transpose()) == Matrix::from_rows({{14, 32}, {32, 77}}));
  CHECK(a.max_abs() == 6);
  CHECK(a.frobenius() == doctest::Approx(std::sqrt(91.0)));
  CHECK(kron(Matrix::identity(2), Matrix::from_rows({{1, 2}})) == Matrix::from_rows({{1, 2, 0, 0}, {0, 0, 1, 2}}));
  CHECK(determinant(Matrix::from_rows({{2, 1}, {7, 4}})) == doctest::Approx(1.0));
  CHECK_THROWS_AS(matmul(a, a), Error);
}

TEST_CASE("qr_orthogonal") {
  SUBCASE("b = 1 normalizes to +1") {
    for (std::uint64_t s = 0; s < 10; ++s) CHECK(qr_orthogonal(SeededRng{s}, 1) == Matrix::identity(1));
  }
  SUBCASE("orthogonal for all b up to 64 over ten seeds") {
    for (std::size_t b = 1; b <= 64; ++b)
      for (std::uint64_t s = 0; s < 10; ++s) REQUIRE(orthogonality_residual(qr_orthogonal(SeededRng{s}, b)) <= 1e-12);
  }
  SUBCASE("deterministic") { CHECK(qr_orthogonal(SeededRng{3}, 5) == qr_orthogonal(SeededRng{3}, 5)); }
  SUBCASE("R has a nonnegative diagonal") {
    const Matrix a = gaussian_matrix(SeededRng{9}, 6, 6);
    const Matrix q = householder_q(a);
    const Matrix r = matmul(q.transpose(), a);
    for (std::size_t i = 0; i < 6; ++i) CHECK(r(i, i) >= 0.0);
    CHECK(near(matmul(q, r), a, 1e-12));
  }
  SUBCASE("matches an independent LAPACK QR") {
    const Matrix expect = Matrix::from_rows({{-0.01916136616697584, 0.3679967831872742, -0.9296296088283943},
                                             {-0.9258961718177957, 0.34433928718665485, 0.1553921951480743},
                                             {-0.37729182479847867, -0.8637180227734075, -0.33412880162690145}});
    CHECK(near(qr_orthogonal(SeededRng{0x902a803728a6506fULL}, 3), expect, 1e-14));
  }
  CHECK(error_code([] { qr_orthogonal(SeededRng{1}, 0); }) == Errc::invalid_dimension);
}

TEST_CASE("sym_eig") {
  SUBCASE("identity") {
    const SymEig e = sym_eig(Matrix::identity(3));
    CHECK(e.values == std::vector<double>{1, 1, 1});
    CHECK(orthogonality_residual(e.vectors) <= 1e-14);
  }
  SUBCASE("diagonal") {
    const SymEig e = sym_eig(Matrix::from_rows({{3, 0}, {0, 1}}));
    CHECK(e.values == std::vector<double>{3, 1});
    CHECK(std::abs(e.vectors(0, 0)) == 1.0);
  }
  SUBCASE("2x2 characteristic polynomial") {
    const SymEig e = sym_eig(Matrix::from_rows({{2, 1}, {1, 2}}));
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("reconstruction on random symmetric matrices") {
    for (std::size_t n : {1, 2, 5, 17, 33, 64}) {
      const Matrix h = test::random_symmetric(100 + n, n);
      const SymEig e = sym_eig(h);
      for (std::size_t k = 1; k < n; ++k) REQUIRE(e.values[k - 1] >= e.values[k]);
      const Matrix rec = matmul(matmul(e.vectors, Matrix::diagonal(e.values)), e.vectors.transpose());
      CHECK(max_abs_diff(rec, h) <= 1e-8 * h.max_abs());
      CHECK(orthogonality_residual(e.vectors) <= 1e-10);
    }
  }
  CHECK(error_code([] { sym_eig(Matrix::from_rows({{1, 2}, {0, 1}})); }) == Errc::invalid_input);
  CHECK(error_code([] { sym_eig(Matrix(2, 3)); }) == Errc::invalid_input);
}

TEST_CASE("solve_linear") {
  const Matrix b = test::random_matrix(5, 3, 2);
  CHECK(solve_linear(Matrix::identity(3), b) == b);
  CHECK(near(solve_linear(Matrix::from_rows({{2, 0}, {0, 4}}), Matrix::identity(2)),
             Matrix::from_rows({{0.5, 0}, {0, 0.25}}), 1e-16));
  CHECK(near(solve_linear(Matrix::from_rows({{1, 1}, {-1, 1}}), Matrix::identity(2)),
             Matrix::from_rows({{0.5, -0.5}, {0.5, 0.5}}), 1e-16));

  for (std::size_t n : {2, 8, 31, 64}) {
    Matrix a = test::random_matrix(200 + n, n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 2.0 * std::sqrt(double(n));
    const Matrix rhs = test::random_matrix(300 + n, n, 3);
    const Matrix x = solve_linear(a, rhs);
    CHECK(max_abs_diff(matmul(a, x), rhs) <= 1e-10 * rhs.max_abs());
    const LuFactor lu(a);
    CHECK(max_abs_diff(matmul(a.transpose(), lu.solve_transpose(rhs)), rhs) <= 1e-10 * rhs.max_abs());
  }
  CHECK(error_code([] { solve_linear(Matrix::from_rows({{1, 2}, {2, 4}}), Matrix::identity(2)); }) ==
        Errc::singular_system);
}

TEST_CASE("power-of-two helpers") {
  CHECK(is_power_of_two(1));
  CHECK(is_power_of_two(4096));
  CHECK_FALSE(is_power_of_two(0));
  CHECK_FALSE(is_power_of_two(96));
  CHECK(log2_exact(1024) == 10);
  CHECK_THROWS_AS(log2_exact(12), Error);
}
