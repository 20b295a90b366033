#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "harp/fitting.hpp"
#include "harp/numerics.hpp"

namespace harp {

/// Outlier-bearing synthetic layer.
///
/// H = C D^2 C^T with C the lower Cholesky factor of the AR(1) correlation
/// rho^|i-j| and D_j = outlier_scale on the outlier channels (1 elsewhere,
/// times an optional log-normal spread), rescaled to unit mean diagonal.
/// W is Gaussian with its outlier columns multiplied by weight_outlier_scale.
struct SyntheticSpec {
  std::size_t d_in = 32;
  std::size_t d_out = 32;
  std::size_t outliers = 2;
  double outlier_scale = 30.0;
  double weight_outlier_scale = 4.0;
  double rho = 0.5;
  double channel_spread = 0.0;  // sigma of log D_j on ordinary channels
  SeededRng seed{1};

  void validate() const;
};

LayerProblem gen_problem(const SyntheticSpec& spec);

/// Outlier channel indices drawn by gen_problem, ascending.
std::vector<std::size_t> outlier_channels(const SyntheticSpec& spec);

/// The fixed 32 x 32 evaluation problems: seeds 1..count of suite_spec().
SyntheticSpec suite_spec(std::size_t index);
std::vector<LayerProblem> frozen_suite(std::size_t count = 10);

// "HTN1" tensor container, little-endian:
//   4 magic, u8 version (1), u8 dtype, u8 rank, rank x u64 dims, payload.
enum class DType : std::uint8_t { f32 = 0, f64 = 1, i8 = 2 };

std::size_t dtype_size(DType t);

struct Tensor {
  DType dtype = DType::f64;
  std::vector<std::uint64_t> dims;
  std::vector<double> values;  // row-major, widened exactly

  /// Rank-2 tensors map directly; rank 1 becomes a single row.
  Matrix to_matrix() const;
};

inline constexpr std::uint8_t kTensorVersion = 1;

/// Throws invalid-input when values are not representable in the dtype
/// (f32 narrowing is allowed; i8 requires integers in [-128, 127]).
std::vector<std::uint8_t> encode_tensor(const Tensor& t);
std::vector<std::uint8_t> encode_tensor(const Matrix& m, DType dtype = DType::f64);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const Matrix& m, DType dtype = DType::f64);
Tensor read_tensor_file(const std::filesystem::path& path);
Matrix read_tensor(const std::filesystem::path& path);

}  // namespace harp
