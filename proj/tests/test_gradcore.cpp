#include <cmath>

#include "harp/fitting.hpp"
#include "harp/gradcore.hpp"
#include "helpers.hpp"
#include "oracle_dense.hpp"

using namespace harp;
using harp::test::error_code;

namespace {

HarpProcessor random_processor(std::size_t d, std::uint64_t seed, std::vector<std::size_t> radices = {},
                               bool kron = false, std::size_t passes = 1) {
  ProcessorOptions o;
  if (!radices.empty()) o.radices = radices;
  o.kronecker = kron;
  o.passes = passes;
  o.sign_seed = SeededRng{seed};
  HarpProcessor p = make_processor(d, o);
  test::randomize(p, seed + 7);
  return p;
}

double inner(const Matrix& a, const Matrix& b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.storage()[i] * b.storage()[i];
  return acc;
}

}  // namespace

TEST_CASE("taped forward is identical to apply") {
  const HarpProcessor p = random_processor(24, 1, {}, false, 2);
  const Matrix x = test::random_matrix(2, 3, 24);
  const TapedApply t = apply_with_tape(p, x);
  CHECK(t.y == apply(p, x));
  CHECK(t.tape.stage_count() == 2 * p.schedule().stages());
}

TEST_CASE("vjp basics") {
  const HarpProcessor p = random_processor(16, 3);
  const Matrix x = test::random_matrix(4, 2, 16);
  const TapedApply t = apply_with_tape(p, x);

  const Vjp zero = vjp(p, t.tape, Matrix(2, 16));
  CHECK(zero.grad_x == Matrix(2, 16));
  for (double g : zero.grad_theta) CHECK(g == 0.0);

  const Matrix up = test::random_matrix(5, 2, 16);
  const Vjp v = vjp(p, t.tape, up);
  CHECK(v.grad_x.frobenius() == doctest::Approx(up.frobenius()).epsilon(1e-10));
  CHECK(test::near(v.grad_x, apply_transpose(p, up), 1e-12));

  // theta = 0 and upstream = Y: the input adjoint returns X.
  ProcessorOptions o;
  o.sign_seed = SeededRng{8};
  const HarpProcessor z = make_processor(16, o);
  const TapedApply tz = apply_with_tape(z, x);
  CHECK(test::near(vjp(z, tz.tape, tz.y).grad_x, x, 1e-12));
}

TEST_CASE("vjp against finite differences") {
  struct Case {
    std::size_t d;
    std::vector<std::size_t> radices;
    bool kron;
    std::size_t passes;
  };
  const Case cases[] = {{12, {4, 3}, false, 1}, {16, {}, false, 1}, {24, {}, false, 2},
                        {30, {}, false, 1},     {24, {}, true, 1},  {40, {}, true, 1}};
  std::uint64_t seed = 10;
  for (const Case& c : cases) {
    HarpProcessor p = random_processor(c.d, ++seed, c.radices, c.kron, c.passes);
    const Matrix x = test::random_matrix(++seed, 2, c.d);
    const Matrix up = test::random_matrix(++seed, 2, c.d);
    const TapedApply t = apply_with_tape(p, x);
    const Vjp v = vjp(p, t.tape, up);

    const std::vector<double> theta0(p.theta().begin(), p.theta().end());
    const ScalarFunction f_theta = [&](std::span<const double> th) {
      HarpProcessor q = p;
      std::copy(th.begin(), th.end(), q.theta().begin());
      return inner(apply(q, x), up);
    };
    CHECK(finite_diff_check(f_theta, theta0, v.grad_theta) <= 1e-4);

    const ScalarFunction f_x = [&](std::span<const double> xs) {
      return inner(apply(p, Matrix(2, c.d, std::vector<double>(xs.begin(), xs.end()))), up);
    };
    CHECK(finite_diff_check(f_x, x.storage(), v.grad_x.storage()) <= 1e-4);
  }
}

TEST_CASE("tape mismatch") {
  const HarpProcessor p = random_processor(16, 1);
  const HarpProcessor q = random_processor(24, 2);
  const TapedApply t = apply_with_tape(p, test::random_matrix(3, 2, 16));
  CHECK(error_code([&] { vjp(q, t.tape, Matrix(2, 24)); }) == Errc::invalid_tape);
  CHECK(error_code([&] { vjp(p, t.tape, Matrix(3, 16)); }) == Errc::invalid_tape);
}

TEST_CASE("layer gradients") {
  const ProcessorPair pair{random_processor(8, 1), random_processor(16, 2)};
  const Matrix w = test::random_matrix(3, 8, 16);
  const Matrix h = test::random_psd(4, 16);

  const PairGrads z = layer_grads(pair, w, h, Matrix(8, 16), Matrix(16, 16));
  for (double g : z.u) CHECK(g == 0.0);
  for (double g : z.v) CHECK(g == 0.0);

  // Loss <G1, U^T W V> + <G2, V^T H V> against finite differences.
  const Matrix g1 = test::random_matrix(5, 8, 16);
  const Matrix g2 = test::random_symmetric(6, 16);
  const PairGrads g = layer_grads(pair, w, h, g1, g2);
  const std::size_t nu = pair.u.param_count();
  std::vector<double> params(pair.u.theta().begin(), pair.u.theta().end());
  params.insert(params.end(), pair.v.theta().begin(), pair.v.theta().end());
  std::vector<double> analytic = g.u;
  analytic.insert(analytic.end(), g.v.begin(), g.v.end());
  const ScalarFunction f = [&](std::span<const double> th) {
    ProcessorPair q = pair;
    std::copy(th.begin(), th.begin() + nu, q.u.theta().begin());
    std::copy(th.begin() + nu, th.end(), q.v.theta().begin());
    const RotatedLayer r = rotate_layer(q, LayerProblem{w, h});
    return inner(g1, r.w) + inner(g2, r.h);
  };
  CHECK(finite_diff_check(f, params, analytic) <= 1e-4);
}

TEST_CASE("zero-loss stationarity") {
  const ProcessorPair pair{random_processor(8, 11), random_processor(8, 12)};
  const LayerProblem prob{test::random_matrix(13, 8, 8), test::random_psd(14, 8)};
  const RotatedLayer r = rotate_layer(pair, prob);
  const FitEvaluation ev = evaluate_fit(pair, prob, r.w, normalized_weights(r.h), 0.0, 4, true);
  CHECK(ev.loss.l_fit == 0.0);
  for (double g : ev.grads.u) CHECK(g == 0.0);
  for (double g : ev.grads.v) CHECK(g == 0.0);
}

TEST_CASE("finite difference oracle") {
  const ScalarFunction quad = [](std::span<const double> x) { return 3 * x[0] * x[0] + x[0] * x[1] - 2 * x[1]; };
  const std::vector<double> at = {0.7, -1.3};
  const std::vector<double> grad = {6 * 0.7 - 1.3, 0.7 - 2};
  CHECK(finite_diff_check(quad, at, grad) <= 1e-9);

  // B00 = cos(theta) - ... with an identity mixer: derivative of cos and sin.
  const ScalarFunction b00 = [](std::span<const double> t) { return givens(t[0])(0, 0); };
  const ScalarFunction b10 = [](std::span<const double> t) { return givens(t[0])(1, 0); };
  const std::vector<double> zero = {0.0};
  CHECK(std::abs(finite_diff_gradient(b00, zero)[0]) <= 1e-10);
  CHECK(finite_diff_gradient(b10, zero)[0] == doctest::Approx(1.0).epsilon(1e-9));
}
