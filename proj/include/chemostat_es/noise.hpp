#pragma once

// Multiplicative measurement disturbance q(t), y = s (1 + q(t)).

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "chemostat_es/errors.hpp"

namespace chemostat_es {

enum class NoiseKind {
  none,           // y = s, the disturbance is not applied at all
  zero,           // q(t) = 0
  square,         // random square signal, uniform on [-a, a], held for 1/omega
  constant_bias,  // q(t) = a
};

inline std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none:
      return "none";
    case NoiseKind::zero:
      return "zero";
    case NoiseKind::square:
      return "square";
    case NoiseKind::constant_bias:
      return "constant_bias";
  }
  return "none";
}

inline NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "none") return NoiseKind::none;
  if (text == "zero") return NoiseKind::zero;
  if (text == "square") return NoiseKind::square;
  if (text == "constant_bias") return NoiseKind::constant_bias;
  throw ConfigError("unknown noise kind '" + std::string(text) + "'");
}

struct NoiseParams {
  NoiseKind kind = NoiseKind::square;
  double omega = 0.2;
  double a = 0.05;
  std::uint64_t seed = 1;

  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

inline void validate(const NoiseParams& noise) {
  if (!(noise.a >= 0.0) || !std::isfinite(noise.a)) {
    throw ConfigError("noise amplitude a must be finite and non-negative");
  }
  if (!(noise.omega > 0.0) || !std::isfinite(noise.omega)) {
    throw ConfigError("noise frequency omega must be positive");
  }
}

inline NoiseParams zero_noise() { return NoiseParams{NoiseKind::zero, 1.0, 0.0, 0}; }
inline NoiseParams no_noise() { return NoiseParams{NoiseKind::none, 1.0, 0.0, 0}; }

namespace detail {

// splitmix64 finalizer; a stateless hash of (seed, interval index).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double unit_uniform(std::uint64_t seed, std::int64_t k) noexcept {
  const std::uint64_t h = mix64(mix64(seed) ^ static_cast<std::uint64_t>(k));
  return static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
}

}  // namespace detail

/// Index of the hold interval [k/omega, (k+1)/omega) containing t.
inline std::int64_t hold_index(const NoiseParams& noise, double t) {
  return static_cast<std::int64_t>(std::floor(t * noise.omega));
}

/// Value of the square signal held on interval k.
inline double square_value(const NoiseParams& noise, std::int64_t k) {
  return noise.a * (2.0 * detail::unit_uniform(noise.seed, k) - 1.0);
}

/// q(t). Order-independent: the value depends only on (seed, hold index).
inline double square_wave(const NoiseParams& noise, double t) {
  switch (noise.kind) {
    case NoiseKind::none:
    case NoiseKind::zero:
      return 0.0;
    case NoiseKind::constant_bias:
      return noise.a;
    case NoiseKind::square:
      if (noise.a == 0.0) return 0.0;
      if (t < 0.0) throw DomainError("square_wave queried at negative time");
      return square_value(noise, hold_index(noise, t));
  }
  return 0.0;
}

}  // namespace chemostat_es
