#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "harp/numerics.hpp"

namespace harp {

enum class QuantizerKind { scalar_rtn, codebook_vq };

/// Reference blockwise backend. Text form (see parse/to_string):
///   scalar:bits=2,group=128
///   vq:bits=2,dim=2,seed=7,scale=on
struct QuantizerSpec {
  QuantizerKind kind = QuantizerKind::scalar_rtn;
  int bits = 2;
  std::size_t group = 128;        // scalar scaling group along each row
  std::size_t vq_dim = 2;         // codeword length g
  std::uint64_t codebook_seed = 7;
  bool per_row_scale = true;

  std::string to_string() const;
  static QuantizerSpec parse(const std::string& text);

  friend bool operator==(const QuantizerSpec&, const QuantizerSpec&) = default;
};

/// Round-to-nearest on an absmax grid per contiguous length-`group` row
/// segment: s = absmax / 2^(k-1), q = clamp(rne(w / s), -2^(k-1), 2^(k-1) - 1).
Matrix quantize_scalar(const Matrix& w, int bits, std::size_t group);

struct Codebook {
  std::size_t dim = 0;          // g
  std::size_t entries = 0;      // 2^(k g)
  std::vector<double> vectors;  // entries x dim, row-major

  std::span<const double> codeword(std::size_t i) const { return {vectors.data() + i * dim, dim}; }
};

/// Seeded Gaussian codebook normalized to unit mean squared entry.
Codebook make_codebook(SeededRng seed, std::size_t dim, int bits);

/// Index of the Euclidean-nearest codeword; ties go to the lowest index.
std::size_t nearest_codeword(const Codebook& cb, std::span<const double> segment);

/// Replaces each contiguous length-g row segment by its nearest codeword.
/// With per-row scaling, assignment happens on the row normalized to unit
/// RMS, and the row is then rescaled by the least-squares optimal factor.
Matrix quantize_vq(const Matrix& w, const Codebook& cb, bool per_row_scale);

/// Spec plus any precomputed state (the codebook).
class Quantizer {
 public:
  explicit Quantizer(QuantizerSpec spec);

  Matrix operator()(const Matrix& w) const;
  const QuantizerSpec& spec() const noexcept { return spec_; }
  /// Contiguous block length the backend operates on for rows of `cols`.
  std::size_t block_size(std::size_t cols) const;
  const std::optional<Codebook>& codebook() const noexcept { return codebook_; }

 private:
  QuantizerSpec spec_;
  std::optional<Codebook> codebook_;
};

}  // namespace harp
