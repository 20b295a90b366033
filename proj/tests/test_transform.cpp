#include <cmath>

#include "harp/transform.hpp"
#include "helpers.hpp"
#include "oracle_dense.hpp"

using namespace harp;
using harp::test::error_code;
using harp::test::near;

namespace {

HarpProcessor plain(std::size_t d, std::vector<std::size_t> radices) {
  Schedule s = make_schedule(d, std::move(radices));
  auto mixers = mixers_for(s);
  return init_zero(s, std::move(mixers), std::vector<std::int8_t>(d, 1));
}

HarpProcessor random_processor(std::size_t d, std::uint64_t seed, std::size_t passes = 1, bool kron = false) {
  ProcessorOptions o;
  o.passes = passes;
  o.kronecker = kron;
  o.sign_seed = SeededRng{seed};
  HarpProcessor p = make_processor(d, o);
  test::randomize(p, seed + 1);
  return p;
}

Matrix row(std::initializer_list<double> v) { return Matrix::from_rows({v}); }

}  // namespace

TEST_CASE("zero processor equals Sylvester Hadamard") {
  CHECK(max_abs_diff(materialize(plain(8, {8})), sylvester_hadamard(8).matrix) == 0.0);
  CHECK(max_abs_diff(materialize(plain(4, {2, 2})), sylvester_hadamard(4).matrix) <= 1e-15);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(near(apply(plain(2, {2}), row({1, 0})), row({r, r}), 1e-16));
}

TEST_CASE("linearity, norms, and round trips") {
  const HarpProcessor p = random_processor(16, 3);
  CHECK(apply(p, Matrix(3, 16)) == Matrix(3, 16));

  const Matrix x = test::random_matrix(5, 4, 16);
  const Matrix y = apply(p, x);
  for (std::size_t i = 0; i < 4; ++i) {
    double nx = 0, ny = 0;
    for (std::size_t j = 0; j < 16; ++j) {
      nx += x(i, j) * x(i, j);
      ny += y(i, j) * y(i, j);
    }
    CHECK(std::sqrt(ny) == doctest::Approx(std::sqrt(nx)).epsilon(1e-10));
  }

  HarpProcessor q = plain(24, {8, 3});
  test::randomize(q, 9);
  const Matrix x24 = test::random_matrix(6, 5, 24);
  CHECK(max_abs_diff(apply_transpose(q, apply(q, x24)), x24) <= 1e-10);
  CHECK(max_abs_diff(apply(q, apply_transpose(q, x24)), x24) <= 1e-10);

  const HarpProcessor h2 = plain(2, {2});
  const Matrix x2 = test::random_matrix(7, 3, 2);
  CHECK(near(apply(h2, x2), apply_transpose(h2, x2), 1e-16));

  CHECK(near(apply_transpose(q, Matrix::identity(24)).transpose(), materialize(q), 1e-14));
  CHECK(error_code([&] { apply(q, Matrix(1, 23)); }) == Errc::invalid_input);
}

TEST_CASE("orthogonality over random schedules and parameters") {
  for (std::size_t d : {8, 16, 24, 40, 96, 512}) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const HarpProcessor p = random_processor(d, 100 * d + s, 1 + s % 2);
      CHECK(orthogonality_residual(materialize(p)) <= 1e-10);
    }
  }
}

TEST_CASE("materialize agrees with the dense oracle") {
  for (std::size_t d : {6, 12, 24, 32, 40, 64}) {
    const HarpProcessor p = random_processor(d, d, 2);
    CHECK(max_abs_diff(materialize(p), test::dense_processor(p)) <= 1e-12);
  }
  const HarpProcessor k = random_processor(96, 11, 1, true);
  CHECK(k.mode() == ProcessorMode::kronecker);
  CHECK(k.kron_order() == 12);
  CHECK(max_abs_diff(materialize(k), test::dense_processor(k)) <= 1e-12);
}

TEST_CASE("stage semantics against explicit I (x) B (x) I") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const std::size_t dims[] = {4, 6, 8, 12, 16, 24, 30, 32, 48, 64};
    const std::size_t d = dims[s % 10];
    const HarpProcessor p = random_processor(d, 500 + s, 1);
    const Matrix x = test::random_matrix(900 + s, 3, d);
    for (std::size_t t = 0; t < p.schedule().stages(); ++t) {
      const Matrix expect = matmul(x, test::dense_stage(p, 0, t).transpose());
      REQUIRE(max_abs_diff(apply_stage(p, 0, t, x), expect) <= 1e-12);
    }
  }
}

TEST_CASE("multiply counts") {
  for (std::size_t d : {16, 24, 96, 512, 4096}) {
    ProcessorOptions o;
    const HarpProcessor p = make_processor(d, o);
    ApplyStats stats;
    apply(p, Matrix(3, d), &stats);
    CHECK(stats.multiplies == 3 * multiply_count(p.schedule()));
    CHECK(apply_multiply_count(p) == multiply_count(p.schedule()));
  }
}

TEST_CASE("rht equivalence") {
  SUBCASE("radix-2 schedule at d = 16") {
    const EquivalenceReport r = rht_equivalence_check(plain(16, {2, 2, 2, 2}));
    CHECK(r.max_abs_error <= 1e-12);
    CHECK(r.direct_hadamard_match);
  }
  SUBCASE("single stage") {
    const EquivalenceReport r = rht_equivalence_check(plain(8, {8}));
    CHECK(r.max_abs_error <= 1e-12);
    CHECK(r.permutation_is_identity);
  }
  SUBCASE("digit reversal for (8, 2)") {
    const auto perm = digit_reversal_permutation(make_schedule(16, {8, 2}));
    // i = d0 + 8 d1 maps to d1 + 2 d0
    for (std::size_t i = 0; i < 16; ++i) CHECK(perm[i] == (i / 8) + 2 * (i % 8));
  }
  SUBCASE("signed, against diag(s) H independently") {
    ProcessorOptions o;
    o.sign_seed = SeededRng{5};
    o.radices = std::vector<std::size_t>{4, 4, 4};
    const HarpProcessor p = make_processor(64, o);
    Matrix ref = sylvester_hadamard(64).matrix;
    for (std::size_t i = 0; i < 64; ++i)
      for (std::size_t j = 0; j < 64; ++j) ref(i, j) *= p.signs()[i];
    CHECK(max_abs_diff(materialize(p), ref) <= 1e-12);
    CHECK(rht_equivalence_check(p).max_abs_error <= 1e-12);
  }
  SUBCASE("kronecker d = 8 as H2 (x) H4") {
    ProcessorOptions o;
    o.kronecker = true;
    o.kron_order = 2;
    o.random_signs = false;
    const HarpProcessor p = make_processor(8, o);
    CHECK(rht_equivalence_check(p).max_abs_error <= 1e-12);
    CHECK(max_abs_diff(materialize(p), kron(sylvester_hadamard(2).matrix, sylvester_hadamard(4).matrix)) <= 1e-15);
  }
  SUBCASE("assumption violations") {
    HarpProcessor p = plain(16, {4, 4});
    p.theta()[0] = 0.1;
    CHECK(error_code([&] { rht_equivalence_check(p); }) == Errc::assumption_violated);

    ProcessorOptions o;
    o.mixers = MixerPolicy::identity;
    CHECK(error_code([&] { rht_equivalence_check(make_processor(16, o)); }) == Errc::assumption_violated);
    CHECK(error_code([&] { rht_equivalence_check(make_processor(24, ProcessorOptions{})); }) ==
          Errc::assumption_violated);
  }
}

TEST_CASE("kronecker factor selection") {
  auto sel = [](std::size_t d) { return select_kron_factorization(d); };
  CHECK(sel(4096)->order == 1);
  CHECK(sel(4096)->log2_inner == 12);
  CHECK(sel(5120)->order == 20);
  CHECK(sel(5120)->log2_inner == 8);
  CHECK(sel(96)->order == 12);
  CHECK(sel(96)->log2_inner == 3);
  CHECK(sel(40)->order == 20);
  CHECK_FALSE(sel(7).has_value());
  CHECK_FALSE(sel(5 * 3 * 8).has_value());
}

TEST_CASE("construction checks") {
  test::WarningCapture quiet;
  const Schedule s = make_schedule(12, {4, 3});
  CHECK(error_code([&] { init_zero(s, mixers_for(make_schedule(12, {3, 4})), std::vector<std::int8_t>(12, 1)); }) ==
        Errc::invalid_input);
  CHECK(error_code([&] { init_zero(s, mixers_for(s), std::vector<std::int8_t>(11, 1)); }) == Errc::invalid_input);
  CHECK(error_code([&] { init_zero(s, mixers_for(s), std::vector<std::int8_t>(12, 0)); }) == Errc::invalid_input);

  ProcessorOptions o;
  o.kronecker = true;
  CHECK(error_code([&] { make_processor(7 * 3 * 8, o); }) == Errc::no_table_available);
  HarpProcessor big = make_processor(8192, ProcessorOptions{});
  CHECK(error_code([&] { materialize(big); }) == Errc::too_large);
}

TEST_CASE("parameter layout") {
  HarpProcessor p = plain(24, {8, 3});
  CHECK(p.param_count() == param_count(p.schedule()));
  CHECK(p.block_offset(0, 1, 0) == 3 * 28);
  p.set_block(0, 1, 2, BlockParams{3, {0.1, 0.2, 0.3}});
  CHECK(p.theta()[3 * 28 + 2 * 3 + 1] == 0.2);
  CHECK(p.block(0, 1, 2).theta == std::vector<double>{0.1, 0.2, 0.3});
  CHECK_FALSE(p.is_zero());
  p.set_zero();
  CHECK(p.is_zero());
}
