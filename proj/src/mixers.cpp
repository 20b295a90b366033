#include "harp/mixers.hpp"

#include <array>
#include <cmath>
#include <string>

#include "harp/error.hpp"

namespace harp {

std::string_view mixer_kind_name(MixerKind kind) {
  switch (kind) {
    case MixerKind::identity: return "identity";
    case MixerKind::hadamard: return "hadamard";
    case MixerKind::qr_fallback: return "qr-fallback";
  }
  return "unknown";
}

namespace {

// Unnormalized Sylvester matrix as +-1 entries.
std::vector<std::int8_t> sylvester_signs(std::size_t b) {
  std::vector<std::int8_t> h{1};
  for (std::size_t n = 1; n < b; n *= 2) {
    std::vector<std::int8_t> next(4 * n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::int8_t v = h[i * n + j];
        next[i * 2 * n + j] = v;
        next[i * 2 * n + j + n] = v;
        next[(i + n) * 2 * n + j] = v;
        next[(i + n) * 2 * n + j + n] = static_cast<std::int8_t>(-v);
      }
    }
    h = std::move(next);
  }
  return h;
}

constexpr std::uint64_t kFallbackSeedBase = 0x4841525046424B31ULL;  // "HARPFBK1"

}  // namespace

BaseMixer sylvester_hadamard(std::size_t b) {
  if (!is_power_of_two(b)) fail(Errc::invalid_radix, "Sylvester Hadamard needs a power of two, got " + std::to_string(b));
  const auto signs = sylvester_signs(b);
  const double scale = 1.0 / std::sqrt(static_cast<double>(b));
  Matrix m(b, b);
  for (std::size_t i = 0; i < b * b; ++i) m.storage()[i] = scale * signs[i];
  return BaseMixer{b, MixerKind::hadamard, 0, std::move(m)};
}

BaseMixer fallback_mixer(std::size_t b, SeededRng seed) {
  if (b < 2 || is_power_of_two(b)) {
    fail(Errc::invalid_radix, "QR fallback is reserved for non-power-of-two radices, got " + std::to_string(b));
  }
  return BaseMixer{b, MixerKind::qr_fallback, seed.seed, qr_orthogonal(seed, b)};
}

BaseMixer identity_mixer(std::size_t b) {
  return BaseMixer{b, MixerKind::identity, 0, Matrix::identity(b)};
}

SeededRng default_fallback_seed(std::size_t b) { return SeededRng{kFallbackSeedBase}.derive(b); }

BaseMixer default_mixer(std::size_t b) {
  if (is_power_of_two(b)) return sylvester_hadamard(b);
  return fallback_mixer(b, default_fallback_seed(b));
}

BaseMixer mixer_from_kind(std::size_t b, MixerKind kind, std::uint64_t seed) {
  switch (kind) {
    case MixerKind::identity: return identity_mixer(b);
    case MixerKind::hadamard: return sylvester_hadamard(b);
    case MixerKind::qr_fallback: return fallback_mixer(b, SeededRng{seed});
  }
  fail(Errc::format_error, "unknown mixer kind " + std::to_string(static_cast<int>(kind)));
}

// --- sign tables -------------------------------------------------------------

Matrix SignTable::normalized() const {
  Matrix m(order, order);
  const double scale = 1.0 / std::sqrt(static_cast<double>(order));
  for (std::size_t i = 0; i < entries.size(); ++i) m.storage()[i] = scale * entries[i];
  return m;
}

namespace {

constexpr std::array<std::size_t, 7> kOrders{1, 2, 4, 8, 12, 20, 28};

// Quadratic character of GF(q), q prime.
int legendre(std::size_t a, std::size_t q) {
  a %= q;
  if (a == 0) return 0;
  for (std::size_t x = 1; x < q; ++x)
    if ((x * x) % q == a) return 1;
  return -1;
}

// Jacobsthal matrix Q_ij = chi(j - i).
std::vector<int> jacobsthal(std::size_t q) {
  std::vector<int> m(q * q);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j) m[i * q + j] = legendre((j + q - i) % q, q);
  return m;
}

// Paley I, q = 3 mod 4: H = I + S with S = [[0, 1^T], [-1, Q]], order q + 1.
SignTable paley_one(std::size_t q) {
  const auto jq = jacobsthal(q);
  const std::size_t n = q + 1;
  SignTable t{n, std::vector<std::int8_t>(n * n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      int s;
      if (i == 0 && j == 0) s = 0;
      else if (i == 0) s = 1;
      else if (j == 0) s = -1;
      else s = jq[(i - 1) * q + (j - 1)];
      if (i == j) s += 1;
      t.entries[i * n + j] = static_cast<std::int8_t>(s);
    }
  }
  return t;
}

// Paley II, q = 1 mod 4: S = [[0, 1^T], [1, Q]] with each 0 replaced by
// [[1, -1], [-1, -1]] and each +-1 by +-[[1, 1], [1, -1]]; order 2(q + 1).
SignTable paley_two(std::size_t q) {
  const auto jq = jacobsthal(q);
  const std::size_t c = q + 1;
  const std::size_t n = 2 * c;
  SignTable t{n, std::vector<std::int8_t>(n * n)};
  constexpr int zero_block[2][2] = {{1, -1}, {-1, -1}};
  constexpr int one_block[2][2] = {{1, 1}, {1, -1}};
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      int s;
      if (i == 0 && j == 0) s = 0;
      else if (i == 0 || j == 0) s = 1;
      else s = jq[(i - 1) * q + (j - 1)];
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
          t.entries[(2 * i + a) * n + 2 * j + b] =
              static_cast<std::int8_t>(s == 0 ? zero_block[a][b] : s * one_block[a][b]);
    }
  }
  return t;
}

}  // namespace

std::span<const std::size_t> supported_table_orders() { return kOrders; }

SignTable sign_table(std::size_t order) {
  SignTable table;
  switch (order) {
    case 1:
    case 2:
    case 4:
    case 8: table = SignTable{order, sylvester_signs(order)}; break;
    case 12: table = paley_one(11); break;
    case 20: table = paley_one(19); break;
    case 28: table = paley_two(13); break;
    default:
      fail(Errc::no_table_available, "no +-1 table of order " + std::to_string(order));
  }
  if (!verify_sign_table(table)) {
    fail(Errc::no_table_available, "constructed table of order " + std::to_string(order) + " failed T T^T = K I");
  }
  return table;
}

bool verify_sign_table(const SignTable& table) {
  const std::size_t k = table.order;
  if (table.entries.size() != k * k) return false;
  for (auto e : table.entries)
    if (e != 1 && e != -1) return false;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      long dot = 0;
      for (std::size_t l = 0; l < k; ++l) dot += long{table(i, l)} * long{table(j, l)};
      if (dot != (i == j ? static_cast<long>(k) : 0L)) return false;
    }
  }
  return true;
}

}  // namespace harp
