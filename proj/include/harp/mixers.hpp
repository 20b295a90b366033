#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "harp/numerics.hpp"

namespace harp {

enum class MixerKind : std::uint8_t { identity = 0, hadamard = 1, qr_fallback = 2 };

std::string_view mixer_kind_name(MixerKind kind);

/// Fixed orthogonal matrix G_b that preconditions every learnable block of a
/// stage.
struct BaseMixer {
  std::size_t size = 0;
  MixerKind kind = MixerKind::identity;
  std::uint64_t seed = 0;  // meaningful for qr_fallback only
  Matrix matrix;
};

/// Normalized Sylvester Hadamard matrix of order b (a power of two).
BaseMixer sylvester_hadamard(std::size_t b);

/// Orthogonal factor of a seeded Gaussian b x b matrix. Power-of-two b is
/// rejected: those radices use the Hadamard mixer.
BaseMixer fallback_mixer(std::size_t b, SeededRng seed);

BaseMixer identity_mixer(std::size_t b);

/// Seed used for the fallback mixer of radix b, shared by every layer.
SeededRng default_fallback_seed(std::size_t b);

/// Hadamard for power-of-two radices, the shared QR fallback otherwise.
BaseMixer default_mixer(std::size_t b);

/// Rebuilds a mixer from its serialized identity.
BaseMixer mixer_from_kind(std::size_t b, MixerKind kind, std::uint64_t seed);

/// K x K matrix with entries +-1 and T T^T = K I.
struct SignTable {
  std::size_t order = 0;
  std::vector<std::int8_t> entries;  // row-major

  int operator()(std::size_t i, std::size_t j) const { return entries[i * order + j]; }
  /// T / sqrt(K).
  Matrix normalized() const;
};

std::span<const std::size_t> supported_table_orders();

/// Throws no-table-available for orders outside supported_table_orders().
SignTable sign_table(std::size_t order);

/// Integer check of T T^T = K I.
bool verify_sign_table(const SignTable& table);

}  // namespace harp
