#pragma once

// Specific growth rate kinetics mu(s). Only the plant, the oracle and tests
// include this header; controllers see nothing but measured outputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "chemostat_es/errors.hpp"

namespace chemostat_es {

/// Substrate-inhibited growth: mu_max s / (K + s + s^2 / K_i).
struct HaldaneParams {
  double mu_max = 1.0;
  double K = 1.0;
  double K_i = 0.1;

  friend bool operator==(const HaldaneParams&, const HaldaneParams&) = default;
};

struct MonodParams {
  double mu_max = 1.0;
  double K = 1.0;

  friend bool operator==(const MonodParams&, const MonodParams&) = default;
};

/// Knots (s_k, mu_k) interpolated with a shape-preserving cubic (PCHIP).
/// The first knot must be (0, 0); mu is held constant beyond the last knot.
class TabulatedGrowth {
public:
  TabulatedGrowth() = default;

  TabulatedGrowth(std::vector<double> s, std::vector<double> mu) : s_(std::move(s)), mu_(std::move(mu)) {
    if (s_.size() != mu_.size() || s_.size() < 2) {
      throw ConfigError("tabulated growth needs at least two knots with matching value count");
    }
    if (s_.front() != 0.0 || mu_.front() != 0.0) {
      throw ConfigError("tabulated growth must start at the knot (0, 0)");
    }
    for (std::size_t k = 1; k < s_.size(); ++k) {
      if (!(s_[k] > s_[k - 1])) {
        throw ConfigError("tabulated growth knots must be strictly increasing");
      }
    }
    for (double m : mu_) {
      if (!(m >= 0.0) || !std::isfinite(m)) {
        throw ConfigError("tabulated growth values must be finite and non-negative");
      }
    }
    compute_slopes();
  }

  const std::vector<double>& knots() const noexcept { return s_; }
  const std::vector<double>& values() const noexcept { return mu_; }

  double value(double s) const { return eval<false>(s); }
  double derivative(double s) const { return eval<true>(s); }

  friend bool operator==(const TabulatedGrowth& a, const TabulatedGrowth& b) {
    return a.s_ == b.s_ && a.mu_ == b.mu_;
  }

private:
  template <bool Derivative>
  double eval(double s) const {
    if (s >= s_.back()) {
      return Derivative ? 0.0 : mu_.back();
    }
    const auto upper = std::upper_bound(s_.begin(), s_.end(), s);
    const auto k = static_cast<std::size_t>(std::distance(s_.begin(), upper)) - 1;
    const double h = s_[k + 1] - s_[k];
    const double t = (s - s_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    if constexpr (Derivative) {
      return ((6.0 * t2 - 6.0 * t) * mu_[k] + (-6.0 * t2 + 6.0 * t) * mu_[k + 1]) / h +
             (3.0 * t2 - 4.0 * t + 1.0) * slope_[k] + (3.0 * t2 - 2.0 * t) * slope_[k + 1];
    } else {
      return (2.0 * t3 - 3.0 * t2 + 1.0) * mu_[k] + (t3 - 2.0 * t2 + t) * h * slope_[k] +
             (-2.0 * t3 + 3.0 * t2) * mu_[k + 1] + (t3 - t2) * h * slope_[k + 1];
    }
  }

  // Fritsch-Butland interior slopes with the three-point shape-preserving end rule.
  void compute_slopes() {
    const std::size_t n = s_.size();
    std::vector<double> h(n - 1);
    std::vector<double> d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = s_[k + 1] - s_[k];
      d[k] = (mu_[k + 1] - mu_[k]) / h[k];
    }
    slope_.assign(n, 0.0);
    if (n == 2) {
      slope_[0] = slope_[1] = d[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (d[k - 1] * d[k] > 0.0) {
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        slope_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
      }
    }
    slope_[0] = end_slope(h[0], h[1], d[0], d[1]);
    slope_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }

  static double end_slope(double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (std::signbit(m) != std::signbit(d0) || d0 == 0.0) {
      m = 0.0;
    } else if (std::signbit(d0) != std::signbit(d1) && std::abs(m) > 3.0 * std::abs(d0)) {
      m = 3.0 * d0;
    }
    return m;
  }

  std::vector<double> s_;
  std::vector<double> mu_;
  std::vector<double> slope_;
};

inline void validate(const HaldaneParams& p) {
  if (!(p.mu_max > 0.0 && p.K > 0.0 && p.K_i > 0.0)) {
    throw ConfigError("Haldane parameters mu_max, K, K_i must be positive");
  }
}

inline void validate(const MonodParams& p) {
  if (!(p.mu_max > 0.0 && p.K > 0.0)) {
    throw ConfigError("Monod parameters mu_max, K must be positive");
  }
}

inline void validate(const TabulatedGrowth&) {}

/// A growth kinetics mu(s) together with its analytic derivative.
class GrowthModel {
public:
  using Variant = std::variant<HaldaneParams, MonodParams, TabulatedGrowth>;

  GrowthModel() : model_(HaldaneParams{}) {}

  template <class Params>
    requires std::is_constructible_v<Variant, Params>
  GrowthModel(Params params) : model_(std::move(params)) {  // NOLINT(google-explicit-constructor)
    std::visit([](const auto& p) { validate(p); }, model_);
  }

  static GrowthModel haldane(double mu_max, double K, double K_i) { return GrowthModel(HaldaneParams{mu_max, K, K_i}); }
  static GrowthModel monod(double mu_max, double K) { return GrowthModel(MonodParams{mu_max, K}); }

  /// Samples another model at the given knots (first knot must be 0).
  static GrowthModel tabulate(const GrowthModel& source, std::span<const double> knots) {
    std::vector<double> s(knots.begin(), knots.end());
    std::vector<double> mu;
    mu.reserve(s.size());
    for (double x : s) {
      mu.push_back(source.mu(x));
    }
    return GrowthModel(TabulatedGrowth(std::move(s), std::move(mu)));
  }

  double mu(double s) const {
    check(s);
    return std::visit(
        [s](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, HaldaneParams>) {
            return p.mu_max * s / (p.K + s + s * s / p.K_i);
          } else if constexpr (std::is_same_v<T, MonodParams>) {
            return p.mu_max * s / (p.K + s);
          } else {
            return p.value(s);
          }
        },
        model_);
  }

  double mu_prime(double s) const {
    check(s);
    return std::visit(
        [s](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, HaldaneParams>) {
            const double den = p.K + s + s * s / p.K_i;
            return p.mu_max * (p.K - s * s / p.K_i) / (den * den);
          } else if constexpr (std::is_same_v<T, MonodParams>) {
            const double den = p.K + s;
            return p.mu_max * p.K / (den * den);
          } else {
            return p.derivative(s);
          }
        },
        model_);
  }

  const Variant& variant() const noexcept { return model_; }

  std::string kind() const {
    switch (model_.index()) {
      case 0:
        return "haldane";
      case 1:
        return "monod";
      default:
        return "tabulated";
    }
  }

  friend bool operator==(const GrowthModel&, const GrowthModel&) = default;

private:
  static void check(double s) {
    if (!(s >= 0.0)) {
      throw DomainError("growth rate evaluated at negative or NaN substrate concentration");
    }
  }

  Variant model_;
};

inline double mu(const GrowthModel& model, double s) { return model.mu(s); }
inline double mu_prime(const GrowthModel& model, double s) { return model.mu_prime(s); }

}  // namespace chemostat_es
