#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace harp {

/// Dense row-major matrix of 64-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  Matrix transpose() const;
  double trace() const;
  double max_abs() const;
  double frobenius() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double scale);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix kron(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);
/// ||A^T A - I||_max.
double orthogonality_residual(const Matrix& q);
double determinant(const Matrix& a);

/// Descriptor of a deterministic random stream.
///
/// The generator is SplitMix64 evaluated in counter form: the i-th output
/// (i = 1, 2, ...) is mix(seed + i * 0x9E3779B97F4A7C15 mod 2^64) with
///
///   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
///   z ^= z >> 27; z *= 0x94D049BB133111EB;
///   z ^= z >> 31;
///
/// uniform() = (z >> 11) * 2^-53. gaussian() is Box-Muller on
/// u1 = ((z1 >> 11) + 1) * 2^-53 and u2 = uniform(): it returns
/// r cos(2 pi u2) and then, from the same pair, r sin(2 pi u2), with
/// r = sqrt(-2 ln u1). Rademacher signs take bit 63 (set means -1).
/// derive(tag) = SeededRng{mix(seed ^ mix(tag + 0x9E3779B97F4A7C15))}.
struct SeededRng {
  static constexpr std::uint32_t kAlgorithmId = 0x534D3634;  // "SM64"

  std::uint64_t seed = 0;

  /// Independent descriptor for a named sub-purpose.
  SeededRng derive(std::uint64_t tag) const;

  friend bool operator==(const SeededRng&, const SeededRng&) = default;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

class RngStream {
 public:
  explicit RngStream(SeededRng rng) : seed_(rng.seed) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double gaussian();
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Matrix gaussian_matrix(SeededRng rng, std::size_t rows, std::size_t cols);

/// Orthogonal factor of the Householder QR of a seeded Gaussian b x b
/// matrix, normalized so that diag(R) >= 0.
Matrix qr_orthogonal(SeededRng rng, std::size_t b);

/// Q factor with the nonnegative-diagonal-R convention for a square matrix.
Matrix householder_q(const Matrix& a);

struct SymEig {
  Matrix vectors;              // columns are eigenvectors
  std::vector<double> values;  // descending
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymEig sym_eig(const Matrix& h);

/// LU factorization with partial pivoting.
class LuFactor {
 public:
  explicit LuFactor(const Matrix& a);

  /// Solves A X = B.
  Matrix solve(const Matrix& b) const;
  /// Solves A^T X = B.
  Matrix solve_transpose(const Matrix& b) const;
  std::size_t dim() const noexcept { return lu_.rows(); }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

Matrix solve_linear(const Matrix& a, const Matrix& b);

std::vector<std::int8_t> rademacher(SeededRng rng, std::size_t d);

bool is_power_of_two(std::size_t n) noexcept;
std::size_t log2_exact(std::size_t n);

}  // namespace harp
