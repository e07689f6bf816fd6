#pragma once

// Continuous-time extremum seeking output feedback:
//
//   u        = sat(Dbar - G1 (y - sbar))
//   Dbar'    = -G2 (y - sbar)(Dbar - D_min)(D_max - Dbar)
//   sbar'/eps = sgn[(F - F_tau)(sbar - sbar_tau)],   F = Dbar (s_in - sbar)
//
// The fast pair (s, Dbar) settles onto the graph Dbar = mu(sbar); the slow
// relay on sbar climbs the quasi-steady objective along that graph.

#include <array>
#include <cmath>
#include <cstddef>

#include "chemostat_es/controller_hook.hpp"
#include "chemostat_es/errors.hpp"
#include "chemostat_es/feedback.hpp"
#include "chemostat_es/history_buffer.hpp"

namespace chemostat_es {

struct FeedbackGains {
  double G1 = 1.0;
  double G2 = 1.0;
  double epsilon = 1e-3;
  double D_min = 0.0;
  double D_max = 1.0;

  friend bool operator==(const FeedbackGains&, const FeedbackGains&) = default;
};

inline void validate(const FeedbackGains& g) {
  if (!(g.G1 > 0.0) || !(g.G2 > 0.0)) throw ConfigError("gains G1 and G2 must be positive");
  if (!(g.epsilon > 0.0)) throw ConfigError("timescale ratio epsilon must be positive");
  if (!(g.D_min >= 0.0) || !(g.D_min < g.D_max)) throw ConfigError("dilution bounds need 0 <= D_min < D_max");
}

struct ContinuousControllerState {
  double Dbar = 0.5;
  double sbar = 0.5;

  friend bool operator==(const ContinuousControllerState&, const ContinuousControllerState&) = default;
};

/// Admissible interval for the substrate reference.
struct SbarBounds {
  double lower = 0.01;
  double upper = 0.99;
};

inline SbarBounds default_sbar_bounds(double s_in) { return {0.01 * s_in, 0.99 * s_in}; }

inline double control_u(double y, const ContinuousControllerState& x, const FeedbackGains& g) {
  return saturate(x.Dbar - g.G1 * (y - x.sbar), g.D_min, g.D_max);
}

inline double dbar_rhs(double y, const ContinuousControllerState& x, const FeedbackGains& g) {
  return -g.G2 * (y - x.sbar) * (x.Dbar - g.D_min) * (g.D_max - x.Dbar);
}

inline double quasi_objective(double Dbar, double sbar, double s_in) { return Dbar * (s_in - sbar); }

/// sgn with sgn(0) = +1.
inline double relay_sign(double value) { return value < 0.0 ? -1.0 : 1.0; }

inline double sbar_rhs(const ContinuousControllerState& x, const FeedbackGains& g,
                       const ContinuousControllerState& delayed, double s_in, const SbarBounds& bounds) {
  const double change = quasi_objective(x.Dbar, x.sbar, s_in) - quasi_objective(delayed.Dbar, delayed.sbar, s_in);
  const double rate = g.epsilon * relay_sign(change * (x.sbar - delayed.sbar));
  if ((x.sbar <= bounds.lower && rate < 0.0) || (x.sbar >= bounds.upper && rate > 0.0)) {
    return 0.0;
  }
  return rate;
}

inline double sbar_rhs(const ContinuousControllerState& x, const FeedbackGains& g,
                       const ContinuousControllerState& delayed, double s_in) {
  return sbar_rhs(x, g, delayed, s_in, default_sbar_bounds(s_in));
}

/// Simulation hook for the three-layer scheme. Internal state is (Dbar, sbar);
/// the delayed pair is frozen at the start of each step.
class ContinuousController {
public:
  using State = std::array<double, 2>;

  ContinuousController(FeedbackGains gains, double s_in, SbarBounds bounds, ContinuousControllerState initial,
                       std::size_t delay_steps)
      : gains_(gains), s_in_(s_in), bounds_(bounds), initial_(initial), history_(delay_steps) {
    validate(gains_);
    if (!(s_in_ > 0.0)) throw ConfigError("s_in must be positive");
    if (!(bounds_.lower < bounds_.upper) || bounds_.lower < 0.0 || bounds_.upper >= s_in_) {
      throw ConfigError("sbar bounds must satisfy 0 <= lower < upper < s_in");
    }
  }

  State initial_state() const { return project({initial_.Dbar, initial_.sbar}); }

  void begin_step(double /*t*/, const State& x) {
    history_.push({x[0], x[1]});
    delayed_ = history_.delayed();
  }

  double input(double y, const State& x) const { return control_u(y, unpack(x), gains_); }

  State derivative(double y, const State& x) const {
    const auto state = unpack(x);
    return {dbar_rhs(y, state, gains_), sbar_rhs(state, gains_, delayed_, s_in_, bounds_)};
  }

  State project(const State& x) const {
    return {saturate(x[0], gains_.D_min, gains_.D_max), saturate(x[1], bounds_.lower, bounds_.upper)};
  }

  Reference reference(double /*y*/, const State& x) const {
    return {x[0], x[1], quasi_objective(x[0], x[1], s_in_)};
  }

  const FeedbackGains& gains() const noexcept { return gains_; }
  const ContinuousControllerState& delayed() const noexcept { return delayed_; }

private:
  static ContinuousControllerState unpack(const State& x) { return {x[0], x[1]}; }

  FeedbackGains gains_;
  double s_in_;
  SbarBounds bounds_;
  ContinuousControllerState initial_;
  HistoryBuffer<ContinuousControllerState> history_;
  ContinuousControllerState delayed_{};
};

/// Adaptive layer only: sbar held fixed, Dbar adapts toward mu(sbar).
class AdaptiveDbarController {
public:
  using State = std::array<double, 1>;

  AdaptiveDbarController(FeedbackGains gains, double sbar, double Dbar0, double s_in)
      : gains_(gains), sbar_(sbar), Dbar0_(Dbar0), s_in_(s_in) {
    validate(gains_);
  }

  State initial_state() const { return {saturate(Dbar0_, gains_.D_min, gains_.D_max)}; }
  void begin_step(double, const State&) {}
  double input(double y, const State& x) const { return control_u(y, {x[0], sbar_}, gains_); }
  State derivative(double y, const State& x) const { return {dbar_rhs(y, {x[0], sbar_}, gains_)}; }
  State project(const State& x) const { return {saturate(x[0], gains_.D_min, gains_.D_max)}; }
  Reference reference(double, const State& x) const { return {x[0], sbar_, quasi_objective(x[0], sbar_, s_in_)}; }

private:
  FeedbackGains gains_;
  double sbar_;
  double Dbar0_;
  double s_in_;
};

static_assert(ControllerHook<ContinuousController>);
static_assert(ControllerHook<AdaptiveDbarController>);

}  // namespace chemostat_es
