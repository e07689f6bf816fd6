#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "chemostat_es/errors.hpp"
#include "chemostat_es/growth_models.hpp"
#include "chemostat_es/noise.hpp"

namespace chemostat_es {

struct PlantParams {
  double s_in = 1.0;
  GrowthModel growth;

  friend bool operator==(const PlantParams&, const PlantParams&) = default;
};

inline void validate(const PlantParams& plant) {
  if (!(plant.s_in > 0.0) || !std::isfinite(plant.s_in)) {
    throw ConfigError("feed concentration s_in must be positive");
  }
}

/// Substrate s and biomass b.
struct PlantState {
  double s = 0.5;
  double b = 0.5;

  friend bool operator==(const PlantState&, const PlantState&) = default;
};

/// Chemostat with unit yield:
///   s' = -mu(s) b + u (s_in - s)
///   b' =  mu(s) b - u b
inline PlantState plant_rhs(const PlantState& x, double u, const PlantParams& plant) {
  // RK4 stages may step a hair below zero near s = 0.
  const double growth = plant.growth.mu(std::max(x.s, 0.0)) * x.b;
  return {-growth + u * (plant.s_in - x.s), growth - u * x.b};
}

/// Measured output y = s (1 + q(t)); exactly s when no disturbance is configured.
inline double measure(const PlantState& x, double t, const std::optional<NoiseParams>& noise) {
  if (!noise || noise->kind == NoiseKind::none) {
    return x.s;
  }
  return x.s * (1.0 + square_wave(*noise, t));
}

}  // namespace chemostat_es
