#include "harp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "byte_io.hpp"
#include "harp/error.hpp"

namespace harp {

void SyntheticSpec::validate() const {
  if (d_in == 0 || d_out == 0) fail(Errc::invalid_dimension, "synthetic problem needs positive dimensions");
  if (outliers > d_in) fail(Errc::invalid_input, "outlier count exceeds d_in");
  if (!(rho >= 0.0 && rho < 1.0)) fail(Errc::invalid_input, "rho must lie in [0, 1)");
  if (!(outlier_scale > 0.0) || !(weight_outlier_scale > 0.0) || !(channel_spread >= 0.0)) {
    fail(Errc::invalid_input, "synthetic scales must be positive");
  }
}

std::vector<std::size_t> outlier_channels(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<std::size_t> idx(spec.d_in);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RngStream rng(spec.seed.derive(0x4F55544C));  // partial Fisher-Yates
  for (std::size_t k = 0; k < spec.outliers; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.next_u64() % (spec.d_in - k));
    std::swap(idx[k], idx[j]);
  }
  idx.resize(spec.outliers);
  std::sort(idx.begin(), idx.end());
  return idx;
}

LayerProblem gen_problem(const SyntheticSpec& spec) {
  const auto outl = outlier_channels(spec);
  const std::size_t n = spec.d_in;

  std::vector<double> d(n, 1.0);
  if (spec.channel_spread > 0.0) {
    RngStream rng(spec.seed.derive(0x53505244));
    for (double& v : d) v = std::exp(spec.channel_spread * rng.gaussian());
  }
  for (std::size_t j : outl) d[j] = spec.outlier_scale;

  // Cholesky factor of rho^|i-j| in closed form: C_ij = rho^(i-j) c_j with
  // c_0 = 1 and c_j = sqrt(1 - rho^2) afterwards.
  const double tail = std::sqrt(1.0 - spec.rho * spec.rho);
  Matrix cd(n, n);  // C D
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) cd(i, j) = std::pow(spec.rho, double(i - j)) * (j == 0 ? 1.0 : tail) * d[j];

  LayerProblem prob;
  prob.h = matmul(cd, cd.transpose());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) prob.h(j, i) = prob.h(i, j);
  // Unit mean diagonal. L_diag only sees mean-normalized weights, but R_bd is
  // quadratic in the scale of H, so without this lambda_bd would mean
  // something different for every outlier_scale.
  prob.h *= double(n) / prob.h.trace();

  prob.w = gaussian_matrix(spec.seed.derive(0x57454947), spec.d_out, n);
  for (std::size_t j : outl)
    for (std::size_t i = 0; i < spec.d_out; ++i) prob.w(i, j) *= spec.weight_outlier_scale;
  return prob;
}

SyntheticSpec suite_spec(std::size_t index) {
  SyntheticSpec s;
  s.seed = SeededRng{index};
  return s;
}

std::vector<LayerProblem> frozen_suite(std::size_t count) {
  std::vector<LayerProblem> out;
  for (std::size_t i = 1; i <= count; ++i) out.push_back(gen_problem(suite_spec(i)));
  return out;
}

// --- tensor files --------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'H', 'T', 'N', '1'};
constexpr std::size_t kMaxRank = 8;

}  // namespace

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::f32: return 4;
    case DType::f64: return 8;
    case DType::i8: return 1;
  }
  fail(Errc::format_error, "unknown dtype");
}

Matrix Tensor::to_matrix() const {
  if (dims.size() == 2) return Matrix(dims[0], dims[1], values);
  if (dims.size() == 1) return Matrix(1, dims[0], values);
  fail(Errc::invalid_input, "tensor of rank " + std::to_string(dims.size()) + " is not a matrix");
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.dims.empty() || t.dims.size() > kMaxRank) fail(Errc::invalid_input, "tensor rank must be 1..8");
  std::uint64_t count = 1;
  for (auto v : t.dims) count *= v;
  if (count != t.values.size()) fail(Errc::invalid_input, "tensor dims do not match the value count");

  detail::ByteWriter w;
  w.bytes(kMagic, 4);
  w.u8(kTensorVersion);
  w.u8(static_cast<std::uint8_t>(t.dtype));
  w.u8(static_cast<std::uint8_t>(t.dims.size()));
  for (auto v : t.dims) w.u64(v);
  for (double v : t.values) {
    switch (t.dtype) {
      case DType::f64: w.f64(v); break;
      case DType::f32: w.f32(static_cast<float>(v)); break;
      case DType::i8:
        if (!(v >= -128.0 && v <= 127.0) || v != std::trunc(v)) {
          fail(Errc::invalid_input, "value not representable as int8");
        }
        w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(v)));
        break;
    }
  }
  return w.take();
}

std::vector<std::uint8_t> encode_tensor(const Matrix& m, DType dtype) {
  return encode_tensor(Tensor{dtype, {m.rows(), m.cols()}, m.storage()});
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "tensor file");
  const auto magic = r.bytes(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) fail(Errc::format_error, "tensor file at offset 0: bad magic (expected HTN1)");
  const std::uint8_t version = r.u8("version");
  if (version != kTensorVersion) r.error("unsupported version " + std::to_string(version));
  const std::uint8_t dt = r.u8("dtype");
  if (dt > 2) r.error("unknown dtype " + std::to_string(dt));
  const std::uint8_t rank = r.u8("rank");
  if (rank == 0 || rank > kMaxRank) r.error("rank " + std::to_string(rank) + " out of range");

  Tensor t;
  t.dtype = static_cast<DType>(dt);
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    const std::uint64_t v = r.u64("dimension");
    if (v != 0 && count > (std::uint64_t{1} << 40) / v) r.error("tensor too large");
    count *= v;
    t.dims.push_back(v);
  }
  r.need(count * dtype_size(t.dtype), "payload");
  t.values.resize(count);
  for (double& v : t.values) {
    switch (t.dtype) {
      case DType::f64: v = r.f64("value"); break;
      case DType::f32: v = r.f32("value"); break;
      case DType::i8: v = static_cast<std::int8_t>(r.u8("value")); break;
    }
  }
  r.expect_end();
  return t;
}

void write_tensor(const std::filesystem::path& path, const Matrix& m, DType dtype) {
  detail::write_file_bytes(path, encode_tensor(m, dtype));
}

Tensor read_tensor_file(const std::filesystem::path& path) {
  return decode_tensor(detail::read_file_bytes(path));
}

Matrix read_tensor(const std::filesystem::path& path) { return read_tensor_file(path).to_matrix(); }

}  // namespace harp
