#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "harp/mixers.hpp"
#include "harp/numerics.hpp"
#include "harp/orthoparam.hpp"
#include "harp/schedule.hpp"

namespace harp {

enum class ProcessorMode : std::uint8_t { mixed_radix = 0, kronecker = 1 };

std::string_view mode_name(ProcessorMode mode);

/// One side's structured orthogonal processor.
///
/// Row convention: apply(x) = (x * signs) * M where M = diag(signs) T^T and
/// T = S_{m-1} ... S_0 acts on column vectors. Stage t views a vector as
/// (g_t, b_t, s_t) with index i = alpha * b_t * s_t + r * s_t + beta and
/// multiplies the length-b_t fibre over r by block c = alpha * s_t + beta.
///
/// In kronecker mode the vector is viewed as K x 2^L; the learnable
/// transform runs along the power-of-two axis and the K axis is mixed by the
/// normalized sign table, i.e. T = H_K (x) T_inner.
///
/// Parameters are stored flat in (pass, stage, block, triangle-index) order.
class HarpProcessor {
 public:
  HarpProcessor() = default;

  std::size_t dim() const noexcept { return kron_order_ * schedule_.dim; }
  std::size_t inner_dim() const noexcept { return schedule_.dim; }
  ProcessorMode mode() const noexcept { return mode_; }
  std::size_t kron_order() const noexcept { return kron_order_; }
  std::size_t passes() const noexcept { return passes_; }
  const Schedule& schedule() const noexcept { return schedule_; }
  const std::vector<BaseMixer>& mixers() const noexcept { return mixers_; }
  const BaseMixer& mixer(std::size_t stage) const { return mixers_.at(stage); }
  const std::vector<std::int8_t>& signs() const noexcept { return signs_; }
  std::uint64_t sign_seed() const noexcept { return sign_seed_; }
  /// Normalized K x K table (kronecker mode), empty otherwise.
  const Matrix& kron_matrix() const noexcept { return kron_matrix_; }

  std::span<const double> theta() const noexcept { return theta_; }
  std::span<double> theta() noexcept { return theta_; }
  std::size_t param_count() const noexcept { return theta_.size(); }
  bool is_zero() const;
  void set_zero();

  std::size_t stage_offset(std::size_t pass, std::size_t stage) const;
  std::size_t block_offset(std::size_t pass, std::size_t stage, std::size_t block) const;
  BlockParams block(std::size_t pass, std::size_t stage, std::size_t block) const;
  void set_block(std::size_t pass, std::size_t stage, std::size_t block, const BlockParams& params);

  /// Processor with every learnable parameter at zero.
  static HarpProcessor zero(Schedule schedule, std::vector<BaseMixer> mixers, std::vector<std::int8_t> signs,
                            std::size_t passes = 1, std::uint64_t sign_seed = 0);
  static HarpProcessor zero_kronecker(Schedule inner, std::vector<BaseMixer> mixers, std::size_t kron_order,
                                      std::vector<std::int8_t> signs, std::size_t passes = 1,
                                      std::uint64_t sign_seed = 0);

 private:
  void finish_construction();

  Schedule schedule_;
  std::size_t passes_ = 1;
  ProcessorMode mode_ = ProcessorMode::mixed_radix;
  std::size_t kron_order_ = 1;
  Matrix kron_matrix_;
  std::vector<BaseMixer> mixers_;
  std::vector<std::int8_t> signs_;
  std::uint64_t sign_seed_ = 0;
  std::vector<double> theta_;
  std::vector<std::size_t> stage_offsets_;  // per (pass, stage), plus total
};

struct ProcessorPair {
  HarpProcessor u;  // d_out side
  HarpProcessor v;  // d_in side
};

/// Zero-initialized mixed-radix processor (the RHT-equivalent starting point).
HarpProcessor init_zero(const Schedule& schedule, std::vector<BaseMixer> mixers, std::vector<std::int8_t> signs);

enum class MixerPolicy { standard, identity };

struct ProcessorOptions {
  std::size_t base_radix = 8;
  std::size_t max_radix = 8;
  std::size_t passes = 1;
  std::optional<std::vector<std::size_t>> radices;  // overrides the greedy schedule
  bool kronecker = false;
  std::optional<std::size_t> kron_order;            // overrides automatic selection
  MixerPolicy mixers = MixerPolicy::standard;
  bool random_signs = true;
  SeededRng sign_seed{0};
};

/// Standard mixers for every stage of a schedule.
std::vector<BaseMixer> mixers_for(const Schedule& schedule, MixerPolicy policy = MixerPolicy::standard);

HarpProcessor make_processor(std::size_t dim, const ProcessorOptions& options);

/// Pair over (d_out, d_in); the two sides draw signs from independent
/// derivations of options.sign_seed.
ProcessorPair make_processor_pair(std::size_t d_out, std::size_t d_in, const ProcessorOptions& options);

struct ApplyStats {
  std::uint64_t multiplies = 0;
};

/// Row-wise y = (x * signs) T^T for every row of X.
Matrix apply(const HarpProcessor& p, const Matrix& x, ApplyStats* stats = nullptr);

/// Inverse of apply: multiplies by T and then by the signs.
Matrix apply_transpose(const HarpProcessor& p, const Matrix& x);

/// Applies a single stride stage (no signs, no kronecker mixing) to rows of
/// length inner_dim().
Matrix apply_stage(const HarpProcessor& p, std::size_t pass, std::size_t stage, const Matrix& x);

inline constexpr std::size_t kMaterializeCap = 4096;

/// Dense M with apply(p, x) = x M; row i is the image of e_i.
Matrix materialize(const HarpProcessor& p, std::size_t cap = kMaterializeCap);

/// Multiplies executed by one apply on a single row.
std::uint64_t apply_multiply_count(const HarpProcessor& p);

/// perm[i] = index of i after reversing the significance of its
/// mixed-radix digits (stage 0 digit becomes the most significant).
std::vector<std::size_t> digit_reversal_permutation(const Schedule& schedule);

struct EquivalenceReport {
  double max_abs_error = 0.0;
  std::vector<std::size_t> permutation;  // on the power-of-two axis
  bool permutation_is_identity = false;
  bool direct_hadamard_match = false;    // equality also holds with P = I
};

/// Compares materialize(p) at theta = 0 with diag(signs) (P^T H_d P)^T
/// (or the Kronecker analogue).
EquivalenceReport rht_equivalence_check(const HarpProcessor& p);

struct KronFactorization {
  std::size_t order = 1;
  std::size_t log2_inner = 0;
};

/// Smallest supported table order K with d / K a power of two.
std::optional<KronFactorization> select_kron_factorization(std::size_t dim);

}  // namespace harp
