#include "harp/transform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "harp/error.hpp"
#include "stage_kernels.hpp"

namespace harp {

std::string_view mode_name(ProcessorMode mode) {
  return mode == ProcessorMode::kronecker ? "kronecker" : "mixed-radix";
}

// --- HarpProcessor --------------------------------------------------------------

HarpProcessor HarpProcessor::zero(Schedule schedule, std::vector<BaseMixer> mixers, std::vector<std::int8_t> signs,
                                  std::size_t passes, std::uint64_t sign_seed) {
  HarpProcessor p;
  p.schedule_ = std::move(schedule);
  p.mixers_ = std::move(mixers);
  p.signs_ = std::move(signs);
  p.passes_ = passes;
  p.sign_seed_ = sign_seed;
  p.finish_construction();
  return p;
}

HarpProcessor HarpProcessor::zero_kronecker(Schedule inner, std::vector<BaseMixer> mixers, std::size_t kron_order,
                                            std::vector<std::int8_t> signs, std::size_t passes,
                                            std::uint64_t sign_seed) {
  if (!is_power_of_two(inner.dim)) {
    fail(Errc::invalid_input, "kronecker inner dimension " + std::to_string(inner.dim) + " is not a power of two");
  }
  HarpProcessor p;
  p.mode_ = ProcessorMode::kronecker;
  p.kron_order_ = kron_order;
  p.kron_matrix_ = sign_table(kron_order).normalized();
  p.schedule_ = std::move(inner);
  p.mixers_ = std::move(mixers);
  p.signs_ = std::move(signs);
  p.passes_ = passes;
  p.sign_seed_ = sign_seed;
  p.finish_construction();
  return p;
}

void HarpProcessor::finish_construction() {
  if (auto v = validate(schedule_)) {
    fail(Errc::invalid_input, "invalid schedule: " + std::string(violation_name(*v)));
  }
  if (passes_ < 1) fail(Errc::invalid_input, "a processor needs at least one pass");
  if (mixers_.size() != schedule_.stages()) {
    fail(Errc::invalid_input, "expected " + std::to_string(schedule_.stages()) + " mixers, got " +
                                  std::to_string(mixers_.size()));
  }
  for (std::size_t t = 0; t < mixers_.size(); ++t) {
    if (mixers_[t].size != schedule_.radices[t] || mixers_[t].matrix.rows() != schedule_.radices[t]) {
      fail(Errc::invalid_input, "mixer for stage " + std::to_string(t) + " has size " +
                                    std::to_string(mixers_[t].size) + ", radix is " +
                                    std::to_string(schedule_.radices[t]));
    }
  }
  if (signs_.size() != dim()) {
    fail(Errc::invalid_input, "sign vector has length " + std::to_string(signs_.size()) + ", dimension is " +
                                  std::to_string(dim()));
  }
  for (auto s : signs_)
    if (s != 1 && s != -1) fail(Errc::invalid_input, "sign entries must be +-1");

  stage_offsets_.clear();
  std::size_t offset = 0;
  for (std::size_t pass = 0; pass < passes_; ++pass) {
    for (std::size_t t = 0; t < schedule_.stages(); ++t) {
      stage_offsets_.push_back(offset);
      offset += schedule_.blocks[t] * block_param_count(schedule_.radices[t]);
    }
  }
  stage_offsets_.push_back(offset);
  theta_.assign(offset, 0.0);
}

bool HarpProcessor::is_zero() const {
  return std::all_of(theta_.begin(), theta_.end(), [](double v) { return v == 0.0; });
}

void HarpProcessor::set_zero() { std::fill(theta_.begin(), theta_.end(), 0.0); }

std::size_t HarpProcessor::stage_offset(std::size_t pass, std::size_t stage) const {
  if (pass >= passes_ || stage >= schedule_.stages()) fail(Errc::invalid_input, "stage index out of range");
  return stage_offsets_[pass * schedule_.stages() + stage];
}

std::size_t HarpProcessor::block_offset(std::size_t pass, std::size_t stage, std::size_t block) const {
  if (block >= schedule_.blocks.at(stage)) fail(Errc::invalid_input, "block index out of range");
  return stage_offset(pass, stage) + block * block_param_count(schedule_.radices[stage]);
}

BlockParams HarpProcessor::block(std::size_t pass, std::size_t stage, std::size_t block) const {
  const std::size_t b = schedule_.radices.at(stage);
  const std::size_t off = block_offset(pass, stage, block);
  return BlockParams{b, std::vector<double>(theta_.begin() + off, theta_.begin() + off + block_param_count(b))};
}

void HarpProcessor::set_block(std::size_t pass, std::size_t stage, std::size_t block, const BlockParams& params) {
  const std::size_t b = schedule_.radices.at(stage);
  if (params.radix != b || params.theta.size() != block_param_count(b)) {
    fail(Errc::invalid_input, "block parameters do not match stage radix");
  }
  std::copy(params.theta.begin(), params.theta.end(), theta_.begin() + block_offset(pass, stage, block));
}

HarpProcessor init_zero(const Schedule& schedule, std::vector<BaseMixer> mixers, std::vector<std::int8_t> signs) {
  return HarpProcessor::zero(schedule, std::move(mixers), std::move(signs));
}

std::vector<BaseMixer> mixers_for(const Schedule& schedule, MixerPolicy policy) {
  std::vector<BaseMixer> mixers;
  for (std::size_t b : schedule.radices)
    mixers.push_back(policy == MixerPolicy::identity ? identity_mixer(b) : default_mixer(b));
  return mixers;
}

HarpProcessor make_processor(std::size_t dim, const ProcessorOptions& options) {
  if (dim < 2) fail(Errc::invalid_dimension, "processor dimension must be >= 2");
  std::vector<std::int8_t> signs =
      options.random_signs ? rademacher(options.sign_seed, dim) : std::vector<std::int8_t>(dim, 1);

  if (!options.kronecker) {
    Schedule s = options.radices ? make_schedule(dim, *options.radices)
                                 : greedy_schedule(dim, options.base_radix, options.max_radix);
    auto mixers = mixers_for(s, options.mixers);
    return HarpProcessor::zero(std::move(s), std::move(mixers), std::move(signs), options.passes,
                               options.sign_seed.seed);
  }

  KronFactorization kf;
  if (options.kron_order) {
    const std::size_t k = *options.kron_order;
    if (k == 0 || dim % k != 0 || !is_power_of_two(dim / k)) {
      fail(Errc::invalid_input, "d=" + std::to_string(dim) + " is not K * 2^L for K=" + std::to_string(k));
    }
    kf = {k, log2_exact(dim / k)};
  } else {
    auto sel = select_kron_factorization(dim);
    if (!sel) fail(Errc::no_table_available, "d=" + std::to_string(dim) + " has no supported K * 2^L factorization");
    kf = *sel;
  }
  const std::size_t inner = std::size_t{1} << kf.log2_inner;
  if (inner < 2) fail(Errc::invalid_dimension, "kronecker inner dimension must be >= 2");
  Schedule s = options.radices ? make_schedule(inner, *options.radices)
                               : greedy_schedule(inner, options.base_radix, options.max_radix);
  auto mixers = mixers_for(s, options.mixers);
  return HarpProcessor::zero_kronecker(std::move(s), std::move(mixers), kf.order, std::move(signs), options.passes,
                                       options.sign_seed.seed);
}

ProcessorPair make_processor_pair(std::size_t d_out, std::size_t d_in, const ProcessorOptions& options) {
  ProcessorOptions u_opts = options;
  ProcessorOptions v_opts = options;
  u_opts.sign_seed = options.sign_seed.derive(0x55);  // 'U'
  v_opts.sign_seed = options.sign_seed.derive(0x56);  // 'V'
  return ProcessorPair{make_processor(d_out, u_opts), make_processor(d_in, v_opts)};
}

// --- staged engine -----------------------------------------------------------------

namespace detail {

StageKernels build_stage(const HarpProcessor& p, std::size_t pass, std::size_t stage, bool keep_caches) {
  const Schedule& s = p.schedule();
  StageKernels k;
  k.radix = s.radices[stage];
  k.stride = s.strides[stage];
  k.groups = s.groups(stage);
  const std::size_t b = k.radix;
  const std::size_t nblocks = s.blocks[stage];
  const std::size_t per = block_param_count(b);
  const BaseMixer& mixer = p.mixer(stage);
  k.blocks.resize(nblocks * b * b);
  if (keep_caches) k.caches.resize(nblocks);
  const std::size_t base = p.stage_offset(pass, stage);
  for (std::size_t c = 0; c < nblocks; ++c) {
    std::span<const double> theta = p.theta().subspan(base + c * per, per);
    Matrix kernel = block_kernel(b, theta, mixer, keep_caches ? &k.caches[c] : nullptr);
    std::copy(kernel.storage().begin(), kernel.storage().end(), k.blocks.begin() + c * b * b);
  }
  return k;
}

std::uint64_t stage_forward(const StageKernels& k, double* buf, std::size_t rows, std::size_t width,
                            bool transpose) {
  const std::size_t b = k.radix;
  const std::size_t s = k.stride;
  std::vector<double> in(b), out(b);
  std::uint64_t mults = 0;
  for (std::size_t row = 0; row < rows; ++row) {
    double* x = buf + row * width;
    for (std::size_t alpha = 0; alpha < k.groups; ++alpha) {
      for (std::size_t beta = 0; beta < s; ++beta) {
        const std::size_t c = alpha * s + beta;
        const std::size_t base = alpha * b * s + beta;
        const double* kernel = k.blocks.data() + c * b * b;
        for (std::size_t r = 0; r < b; ++r) in[r] = x[base + r * s];
        if (!transpose) {
          for (std::size_t r = 0; r < b; ++r) {
            double acc = 0.0;
            for (std::size_t q = 0; q < b; ++q) acc += kernel[r * b + q] * in[q];
            out[r] = acc;
          }
        } else {
          for (std::size_t r = 0; r < b; ++r) {
            double acc = 0.0;
            for (std::size_t q = 0; q < b; ++q) acc += kernel[q * b + r] * in[q];
            out[r] = acc;
          }
        }
        for (std::size_t r = 0; r < b; ++r) x[base + r * s] = out[r];
        mults += b * b;
      }
    }
  }
  return mults;
}

std::uint64_t kron_mix(const Matrix& table, double* buf, std::size_t rows, std::size_t n2, bool transpose) {
  const std::size_t kk = table.rows();
  std::vector<double> tmp(kk * n2);
  std::uint64_t mults = 0;
  for (std::size_t row = 0; row < rows; ++row) {
    double* x = buf + row * kk * n2;
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (std::size_t k = 0; k < kk; ++k) {
      for (std::size_t kp = 0; kp < kk; ++kp) {
        const double h = transpose ? table(kp, k) : table(k, kp);
        const double* src = x + kp * n2;
        double* dst = tmp.data() + k * n2;
        for (std::size_t j = 0; j < n2; ++j) dst[j] += h * src[j];
      }
    }
    std::copy(tmp.begin(), tmp.end(), x);
    mults += kk * kk * n2;
  }
  return mults;
}

void scale_columns(Matrix& x, const std::vector<std::int8_t>& signs) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    for (std::size_t j = 0; j < row.size(); ++j)
      if (signs[j] < 0) row[j] = -row[j];
  }
}

}  // namespace detail

namespace {

void check_width(const HarpProcessor& p, const Matrix& x) {
  if (x.cols() != p.dim()) {
    fail(Errc::invalid_input, "input has " + std::to_string(x.cols()) + " columns, processor dimension is " +
                                  std::to_string(p.dim()));
  }
}

}  // namespace

Matrix apply(const HarpProcessor& p, const Matrix& x, ApplyStats* stats) {
  check_width(p, x);
  Matrix y = x;
  detail::scale_columns(y, p.signs());
  const std::size_t n2 = p.inner_dim();
  const std::size_t inner_rows = y.rows() * p.kron_order();
  std::uint64_t mults = 0;
  for (std::size_t pass = 0; pass < p.passes(); ++pass) {
    for (std::size_t t = 0; t < p.schedule().stages(); ++t) {
      const auto kernels = detail::build_stage(p, pass, t, false);
      mults += detail::stage_forward(kernels, y.data(), inner_rows, n2, false);
    }
  }
  if (p.mode() == ProcessorMode::kronecker) mults += detail::kron_mix(p.kron_matrix(), y.data(), y.rows(), n2, false);
  if (stats) stats->multiplies += mults;
  return y;
}

Matrix apply_transpose(const HarpProcessor& p, const Matrix& x) {
  check_width(p, x);
  Matrix y = x;
  const std::size_t n2 = p.inner_dim();
  const std::size_t inner_rows = y.rows() * p.kron_order();
  if (p.mode() == ProcessorMode::kronecker) detail::kron_mix(p.kron_matrix(), y.data(), y.rows(), n2, true);
  for (std::size_t pass = p.passes(); pass-- > 0;) {
    for (std::size_t t = p.schedule().stages(); t-- > 0;) {
      const auto kernels = detail::build_stage(p, pass, t, false);
      detail::stage_forward(kernels, y.data(), inner_rows, n2, true);
    }
  }
  detail::scale_columns(y, p.signs());
  return y;
}

Matrix apply_stage(const HarpProcessor& p, std::size_t pass, std::size_t stage, const Matrix& x) {
  if (x.cols() != p.inner_dim()) fail(Errc::invalid_input, "stage input width must equal the inner dimension");
  Matrix y = x;
  const auto kernels = detail::build_stage(p, pass, stage, false);
  detail::stage_forward(kernels, y.data(), y.rows(), y.cols(), false);
  return y;
}

Matrix materialize(const HarpProcessor& p, std::size_t cap) {
  if (p.dim() > cap) {
    fail(Errc::too_large, "materialize: d=" + std::to_string(p.dim()) + " exceeds cap " + std::to_string(cap));
  }
  return apply(p, Matrix::identity(p.dim()));
}

std::uint64_t apply_multiply_count(const HarpProcessor& p) {
  const std::uint64_t k = p.kron_order();
  std::uint64_t total = p.passes() * k * multiply_count(p.schedule());
  if (p.mode() == ProcessorMode::kronecker) total += k * k * p.inner_dim();
  return total;
}

std::vector<std::size_t> digit_reversal_permutation(const Schedule& schedule) {
  const std::size_t m = schedule.stages();
  // Weights of each digit once the significance order is reversed.
  std::vector<std::size_t> reversed_weight(m);
  std::size_t w = 1;
  for (std::size_t t = m; t-- > 0;) {
    reversed_weight[t] = w;
    w *= schedule.radices[t];
  }
  std::vector<std::size_t> perm(schedule.dim);
  for (std::size_t i = 0; i < schedule.dim; ++i) {
    std::size_t rest = i;
    std::size_t j = 0;
    for (std::size_t t = 0; t < m; ++t) {
      const std::size_t digit = rest % schedule.radices[t];
      rest /= schedule.radices[t];
      j += digit * reversed_weight[t];
    }
    perm[i] = j;
  }
  return perm;
}

EquivalenceReport rht_equivalence_check(const HarpProcessor& p) {
  if (!p.is_zero()) fail(Errc::assumption_violated, "equivalence holds only at theta = 0");
  const Schedule& s = p.schedule();
  if (!is_power_of_two(s.dim)) {
    fail(Errc::assumption_violated, "the stride dimension " + std::to_string(s.dim) + " is not a power of two");
  }
  for (std::size_t t = 0; t < s.stages(); ++t) {
    if (p.mixer(t).kind != MixerKind::hadamard) {
      fail(Errc::assumption_violated, "stage " + std::to_string(t) + " uses a " +
                                          std::string(mixer_kind_name(p.mixer(t).kind)) + " mixer");
    }
  }

  const std::size_t n2 = s.dim;
  const Matrix h = sylvester_hadamard(n2).matrix;
  EquivalenceReport report;
  report.permutation = digit_reversal_permutation(s);
  report.permutation_is_identity = true;
  for (std::size_t i = 0; i < n2; ++i)
    if (report.permutation[i] != i) report.permutation_is_identity = false;

  // Column-convention reference on the power-of-two axis: (P^T H P)[i, j] = H[perm i, perm j].
  Matrix inner_ref(n2, n2);
  for (std::size_t i = 0; i < n2; ++i)
    for (std::size_t j = 0; j < n2; ++j) inner_ref(i, j) = h(report.permutation[i], report.permutation[j]);

  Matrix col_ref = inner_ref;
  Matrix col_direct = h;
  if (p.mode() == ProcessorMode::kronecker) {
    col_ref = kron(p.kron_matrix(), inner_ref);
    col_direct = kron(p.kron_matrix(), h);
  }

  const Matrix m = materialize(p);
  auto row_convention = [&](const Matrix& col) {
    Matrix r = col.transpose();
    for (std::size_t i = 0; i < r.rows(); ++i)
      if (p.signs()[i] < 0)
        for (double& v : r.row(i)) v = -v;
    return r;
  };
  report.max_abs_error = max_abs_diff(m, row_convention(col_ref));
  report.direct_hadamard_match = max_abs_diff(m, row_convention(col_direct)) <= 1e-12;
  return report;
}

std::optional<KronFactorization> select_kron_factorization(std::size_t dim) {
  if (dim < 2) return std::nullopt;
  for (std::size_t k : supported_table_orders()) {
    if (dim % k == 0 && is_power_of_two(dim / k)) return KronFactorization{k, log2_exact(dim / k)};
  }
  return std::nullopt;
}

}  // namespace harp
