#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "harp/error.hpp"
#include "harp/numerics.hpp"

namespace harp::test {

inline bool near(const Matrix& a, const Matrix& b, double tol) {
  return a.rows() == b.rows() && a.cols() == b.cols() && max_abs_diff(a, b) <= tol;
}

inline Matrix random_matrix(std::uint64_t seed, std::size_t r, std::size_t c) {
  return gaussian_matrix(SeededRng{seed}, r, c);
}

inline Matrix random_symmetric(std::uint64_t seed, std::size_t n) {
  Matrix a = random_matrix(seed, n, n);
  return 0.5 * (a + a.transpose());
}

inline Matrix random_psd(std::uint64_t seed, std::size_t n) {
  Matrix a = random_matrix(seed, n, n);
  Matrix h = matmul(a, a.transpose());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) h(j, i) = h(i, j);
  return h;
}

// Silences warnings for the lifetime of the object, counting them.
struct WarningCapture {
  std::vector<std::string> messages;
  WarningHandler previous;
  WarningCapture() {
    previous = set_warning_handler([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~WarningCapture() { set_warning_handler(previous); }
};

template <class F>
Errc error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected harp::Error");
  return Errc::invalid_input;
}

}  // namespace harp::test
