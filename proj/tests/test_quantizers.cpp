#include <cmath>

#include "harp/quantizers.hpp"
#include "helpers.hpp"

using namespace harp;
using harp::test::error_code;

namespace {

double sqdist(std::span<const double> a, std::span<const double> b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

// q(w) keeps every group's absmax, i.e. the scale was set by an entry that
// landed on the negative end of the grid. Then a second pass sees the same
// scale and the same codes.
bool groups_keep_absmax(const Matrix& w, const Matrix& qw, std::size_t group) {
  for (std::size_t i = 0; i < qw.rows(); ++i)
    for (std::size_t s = 0; s < qw.cols(); s += group) {
      double a = 0, b = 0;
      for (std::size_t j = s; j < s + group; ++j) {
        a = std::max(a, std::abs(w(i, j)));
        b = std::max(b, std::abs(qw(i, j)));
      }
      if (a != b) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("scalar rtn examples") {
  const Matrix w = Matrix::from_rows({{1.5, -3.0, 0.75, 3.0}});
  CHECK(quantize_scalar(w, 2, 4) == Matrix::from_rows({{1.5, -3.0, 0.0, 1.5}}));
  CHECK(quantize_scalar(Matrix(2, 8), 2, 4) == Matrix(2, 8));
  const Matrix grid = Matrix::from_rows({{-1.0, 0.5, 0.0, -0.5}, {0.25, -0.5, 0.25, 0.0}});
  CHECK(quantize_scalar(grid, 2, 4) == grid);
  // 3 bits: s = 4/4 = 1, 2.5 rounds to 2 and -0.5 to -0 (half-even)
  CHECK(quantize_scalar(Matrix::from_rows({{4.0, 2.5, -0.5, -4.0}}), 3, 4) ==
        Matrix::from_rows({{3.0, 2.0, -0.0, -4.0}}));
  CHECK(error_code([] { quantize_scalar(Matrix(1, 6), 2, 4); }) == Errc::invalid_block);
}

TEST_CASE("scalar rtn properties") {
  int checked = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const int bits = 2 + static_cast<int>(s % 4);
    const Matrix w = test::random_matrix(s, 6, 16);
    const Matrix q = quantize_scalar(w, bits, 8);
    CHECK(q == quantize_scalar(w, bits, 8));
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t g = 0; g < 16; g += 8) {
        double a = 0, b = 0;
        for (std::size_t j = g; j < g + 8; ++j) {
          a = std::max(a, std::abs(w(i, j)));
          b = std::max(b, std::abs(q(i, j)));
        }
        CHECK(b <= a);
      }
    const Matrix w1 = test::random_matrix(100 + s, 1, 8);
    const Matrix q1 = quantize_scalar(w1, bits, 8);
    if (groups_keep_absmax(w1, q1, 8)) {
      const Matrix qq = quantize_scalar(q1, bits, 8);
      CAPTURE(s);
      CHECK(max_abs_diff(qq, q1) == 0.0);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("scalar rtn is not idempotent when only a positive entry sets the scale") {
  const Matrix w = Matrix::from_rows({{3.0, 0.0, 0.0, 0.0}});
  const Matrix once = quantize_scalar(w, 2, 4);
  CHECK(once == Matrix::from_rows({{1.5, 0.0, 0.0, 0.0}}));
  CHECK(quantize_scalar(once, 2, 4) == Matrix::from_rows({{0.75, 0.0, 0.0, 0.0}}));
}

TEST_CASE("codebooks") {
  CHECK(make_codebook(SeededRng{7}, 1, 2).entries == 4);
  const Codebook cb = make_codebook(SeededRng{7}, 2, 2);
  CHECK(cb.entries == 16);
  CHECK(cb.vectors.size() == 32);
  CHECK(cb.vectors == make_codebook(SeededRng{7}, 2, 2).vectors);
  CHECK(cb.vectors != make_codebook(SeededRng{8}, 2, 2).vectors);
  double ms = 0;
  for (double v : cb.vectors) ms += v * v;
  CHECK(ms / 32 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(make_codebook(SeededRng{1}, 3, 4).entries == 4096);
  CHECK(error_code([] { make_codebook(SeededRng{1}, 4, 4); }) == Errc::too_large);
}

TEST_CASE("vq assignment") {
  const Codebook cb = make_codebook(SeededRng{7}, 2, 2);

  SUBCASE("exact codewords survive without scaling") {
    Matrix w(2, 6);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t s = 0; s < 3; ++s) {
        const auto c = cb.codeword((5 * i + 3 * s) % 16);
        w(i, 2 * s) = c[0];
        w(i, 2 * s + 1) = c[1];
      }
    CHECK(quantize_vq(w, cb, false) == w);
    CHECK(quantize_vq(quantize_vq(w, cb, false), cb, false) == quantize_vq(w, cb, false));
  }

  SUBCASE("ties go to the lowest index") {
    Codebook t;
    t.dim = 1;
    t.entries = 8;
    t.vectors = {10, 11, 12, -1, 13, 14, 15, 1};
    const std::vector<double> mid = {0.0};
    CHECK(nearest_codeword(t, mid) == 3);
  }

  SUBCASE("matches exhaustive search on random inputs") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Matrix w = test::random_matrix(40 + s, 4, 8);
      const Matrix q = quantize_vq(w, cb, false);
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t g = 0; g < 8; g += 2) {
          const auto seg = w.row(i).subspan(g, 2);
          double best = INFINITY;
          std::size_t arg = 0;
          for (std::size_t k = 0; k < 16; ++k) {
            const double dd = sqdist(seg, cb.codeword(k));
            if (dd < best) best = dd, arg = k;
          }
          CHECK(q(i, g) == cb.codeword(arg)[0]);
          CHECK(q(i, g + 1) == cb.codeword(arg)[1]);
          CHECK(sqdist(seg, q.row(i).subspan(g, 2)) <= best);
        }
    }
  }

  SUBCASE("per-row scale is the least-squares factor") {
    const Matrix w = test::random_matrix(77, 3, 8);
    const Matrix q = quantize_vq(w, cb, true);
    for (std::size_t i = 0; i < 3; ++i) {
      double resid_dot = 0;
      for (std::size_t j = 0; j < 8; ++j) resid_dot += (w(i, j) - q(i, j)) * q(i, j);
      CHECK(std::abs(resid_dot) <= 1e-12);
    }
  }
  CHECK(error_code([&] { quantize_vq(Matrix(1, 3), cb, false); }) == Errc::invalid_block);
}

TEST_CASE("spec text form") {
  const QuantizerSpec a = QuantizerSpec::parse("scalar:bits=3,group=16");
  CHECK(a.kind == QuantizerKind::scalar_rtn);
  CHECK(a.bits == 3);
  CHECK(a.group == 16);
  CHECK(QuantizerSpec::parse(a.to_string()) == a);

  const QuantizerSpec b = QuantizerSpec::parse("vq:bits=2,dim=3,seed=11,scale=off");
  CHECK(b.vq_dim == 3);
  CHECK(b.codebook_seed == 11);
  CHECK_FALSE(b.per_row_scale);
  CHECK(QuantizerSpec::parse(b.to_string()) == b);
  CHECK(QuantizerSpec::parse("scalar") == QuantizerSpec{});

  for (const char* bad : {"lattice:bits=2", "scalar:bits=1", "scalar:bits=9", "scalar:dim=2", "vq:scale=maybe",
                          "scalar:group=0", "scalar:bits=x", "scalar:bits"}) {
    CAPTURE(bad);
    CHECK(error_code([bad] { QuantizerSpec::parse(bad); }) == Errc::invalid_input);
  }
}

TEST_CASE("quantizer object") {
  const Quantizer scalar(QuantizerSpec::parse("scalar:bits=2,group=128"));
  CHECK(scalar.block_size(32) == 32);
  CHECK(scalar.block_size(256) == 128);
  const Matrix w = test::random_matrix(5, 4, 32);
  CHECK(scalar(w) == quantize_scalar(w, 2, 32));

  const Quantizer vq(QuantizerSpec::parse("vq:bits=2,dim=2,seed=7,scale=off"));
  CHECK(vq.block_size(32) == 2);
  REQUIRE(vq.codebook().has_value());
  CHECK(vq(w) == quantize_vq(w, make_codebook(SeededRng{7}, 2, 2), false));
}
