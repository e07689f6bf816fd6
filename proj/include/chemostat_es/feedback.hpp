#pragma once

#include <cmath>

#include "chemostat_es/errors.hpp"

namespace chemostat_es {

/// Clamp xi to [D_min, D_max].
inline double saturate(double xi, double D_min, double D_max) {
  if (D_min > D_max) {
    throw ConfigError("saturation bounds inverted: D_min > D_max");
  }
  return xi < D_min ? D_min : (xi > D_max ? D_max : xi);
}

/// Static output feedback u = sat(vbar - G1 y) with the combined parameter
/// vbar = Dbar + G1 sbar.
struct SingleParamFeedback {
  double vbar = 0.0;
  double G1 = 1.0;
  double D_min = 0.0;
  double D_max = 1.0;

  double operator()(double y) const { return saturate(vbar - G1 * y, D_min, D_max); }
};

/// The line {Dbar + G1 sbar = vbar} meets [s_min, s_max] x [D_min, D_max].
inline bool line_meets_box(double vbar, double G1, double s_min, double s_max, double D_min, double D_max) {
  // vbar ranges over [D_min + G1 s_min, D_max + G1 s_max] on the box.
  return vbar >= D_min + G1 * s_min && vbar <= D_max + G1 * s_max;
}

}  // namespace chemostat_es
