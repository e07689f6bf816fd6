#pragma once

// Ground truth for tests and reports. Uses the growth model directly, which
// no controller is allowed to do.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "chemostat_es/errors.hpp"
#include "chemostat_es/feedback.hpp"
#include "chemostat_es/growth_models.hpp"
#include "chemostat_es/plant.hpp"

namespace chemostat_es::oracle {

struct EquilibriumResult {
  double s_eq = 0.0;
  double b_eq = 0.0;
  double u_eq = 0.0;
  bool saturated = false;  // the input sits on D_min or D_max at equilibrium
  bool boundary = false;   // no interior root: washout (s_eq = s_in) or s_eq = 0
};

struct DilutionBox {
  double D_min = 0.0;
  double D_max = 1.0;
};

namespace detail {

// Maximizes f on [lo, hi]: grid scan, then golden-section refinement of the
// cell around the best grid point.
template <class F>
std::pair<double, double> maximize_scalar(F&& f, double lo, double hi, int grid = 10000, double tol = 1e-10) {
  std::size_t best = 0;
  double best_val = f(lo);
  const double step = (hi - lo) / grid;
  for (int i = 1; i <= grid; ++i) {
    const double val = f(lo + step * i);
    if (val > best_val) {
      best_val = val;
      best = static_cast<std::size_t>(i);
    }
  }
  double a = std::max(lo, lo + step * (static_cast<double>(best) - 1.0));
  double b = std::min(hi, lo + step * (static_cast<double>(best) + 1.0));
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  double x = 0.5 * (a + b);
  double fx = f(x);
  // The maximum may sit on an end point of the interval.
  if (best_val > fx) {
    x = lo + step * static_cast<double>(best);
    fx = best_val;
  }
  return {x, fx};
}

}  // namespace detail

/// max over [0, s_in] of -mu'(s): the first term of the gain bound that makes
/// the saturated proportional feedback globally attractive.
inline double min_gain(const PlantParams& plant) {
  return detail::maximize_scalar([&](double s) { return -plant.growth.mu_prime(s); }, 0.0, plant.s_in).second;
}

/// Output-input characteristic: the reference input that makes sbar an
/// equilibrium output, psi(sbar) = mu(sbar).
inline double psi(double sbar, const PlantParams& plant) {
  if (!(sbar > 0.0 && sbar < plant.s_in)) {
    throw DomainError("psi is defined on the open interval (0, s_in)");
  }
  return plant.growth.mu(sbar);
}

/// Unique closed-loop equilibrium of u = sat(vbar - G1 y), y = s. Solves
/// mu(s) = sat(vbar - G1 s) on [0, s_in] by bisection.
inline EquilibriumResult equilibrium_solve(double vbar, double G1, const PlantParams& plant, const DilutionBox& box) {
  validate(plant);
  if (!(box.D_min < box.D_max)) throw ConfigError("dilution bounds inverted");
  const double needed = min_gain(plant);
  if (!(G1 > needed)) {
    throw ConfigError("gain G1 does not exceed max(-mu') on [0, s_in]; equilibrium may not be unique");
  }
  const double s_in = plant.s_in;
  const auto g = [&](double s) { return plant.growth.mu(s) - saturate(vbar - G1 * s, box.D_min, box.D_max); };
  const auto finish = [&](double s, bool boundary) {
    EquilibriumResult r;
    r.s_eq = s;
    r.b_eq = s_in - s;
    r.u_eq = saturate(vbar - G1 * s, box.D_min, box.D_max);
    const double raw = vbar - G1 * s;
    r.saturated = raw <= box.D_min || raw >= box.D_max;
    r.boundary = boundary;
    return r;
  };

  const double g0 = g(0.0);
  if (g0 >= 0.0) {
    // No dilution at s = 0: substrate is consumed entirely.
    return finish(0.0, true);
  }
  if (g(s_in) <= 0.0) {
    // Dilution exceeds growth everywhere: washout.
    EquilibriumResult r = finish(s_in, true);
    r.b_eq = 0.0;
    return r;
  }
  double lo = 0.0;
  double hi = s_in;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) {
      lo = hi = mid;
      break;
    }
    (gm < 0.0 ? lo : hi) = mid;
  }
  const double s = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
  return finish(s, false);
}

struct Optimum {
  double s_star = 0.0;
  double phi_star = 0.0;
};

/// Objective at steady state: phi(s) = mu(s) (s_in - s).
inline double phi(double s, const PlantParams& plant) { return plant.growth.mu(s) * (plant.s_in - s); }

/// Maximizer of phi on [0, s_in].
inline Optimum phi_opt(const PlantParams& plant) {
  validate(plant);
  auto [s, f] = detail::maximize_scalar([&](double x) { return phi(x, plant); }, 0.0, plant.s_in);
  // Golden section on a flat top stalls near sqrt(machine eps); bisect the
  // first-order condition to full precision when it brackets a root.
  const auto dphi = [&](double x) { return plant.growth.mu_prime(x) * (plant.s_in - x) - plant.growth.mu(x); };
  const double h = 1e-4 * plant.s_in;
  double a = std::max(0.0, s - h);
  double b = std::min(plant.s_in, s + h);
  if (dphi(a) > 0.0 && dphi(b) < 0.0) {
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      (dphi(m) > 0.0 ? a : b) = m;
    }
    const double root = 0.5 * (a + b);
    // phi is flat to rounding there, so compare with a relative slack.
    if (phi(root, plant) >= f - 1e-14 * std::abs(f)) {
      s = root;
      f = phi(root, plant);
    }
  }
  return {s, f};
}

}  // namespace chemostat_es::oracle
