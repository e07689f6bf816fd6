#pragma once

// Golden-section bracketing followed by Newton steps on a parabola through
// three samples. The objective is a black box: an evaluator maps a parameter
// vbar and an averaging window to a (noisy) value F(vbar).

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "chemostat_es/errors.hpp"

namespace chemostat_es {

/// (3 - sqrt 5) / 2, position of the interior point of a fresh golden bracket.
inline const double kGoldenFraction = (3.0 - std::sqrt(5.0)) / 2.0;
/// (sqrt 5 - 1) / 2, width reduction per golden step.
inline const double kGoldenRatio = (std::sqrt(5.0) - 1.0) / 2.0;

/// One objective evaluation as reported by an evaluator.
struct ObjectiveSample {
  double F = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  int windows_used = 0;
};

template <class E>
concept ObjectiveEvaluator = requires(E& e, double vbar, double window) {
  { e(vbar, window) } -> std::same_as<ObjectiveSample>;
};

/// Adapts a plain function F(vbar) into an evaluator (window ignored).
template <class F>
struct FunctionEvaluator {
  F f;
  ObjectiveSample operator()(double vbar, double /*window*/) { return {f(vbar), 0.0, 0.0, 0}; }
};
template <class F>
FunctionEvaluator(F) -> FunctionEvaluator<F>;

enum class Phase { golden, newton, apply };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::golden:
      return "golden";
    case Phase::newton:
      return "newton";
    case Phase::apply:
      return "apply";
  }
  return "golden";
}

struct EvaluationRecord {
  Phase phase = Phase::golden;
  double vbar = 0.0;
  double F = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  int windows_used = 0;
};

using EvaluationLog = std::vector<EvaluationRecord>;

inline void write_csv(std::ostream& out, const EvaluationLog& log) {
  out << "phase,vbar,F,t_start,t_end,windows_used\n" << std::setprecision(17);
  for (const auto& r : log) {
    out << to_string(r.phase) << ',' << r.vbar << ',' << r.F << ',' << r.t_start << ',' << r.t_end << ','
        << r.windows_used << '\n';
  }
}

namespace detail {

template <ObjectiveEvaluator E>
double evaluate_logged(E& evaluator, double vbar, double window, Phase phase, EvaluationLog* log) {
  const ObjectiveSample s = evaluator(vbar, window);
  if (log) log->push_back({phase, vbar, s.F, s.t_start, s.t_end, s.windows_used});
  return s.F;
}

}  // namespace detail

/// Bracketing triple v[0] < v[1] < v[2] with objective values F.
struct GoldenState {
  std::array<double, 3> v{};
  std::array<double, 3> F{};

  double width() const noexcept { return v[2] - v[0]; }

  std::size_t best_index() const noexcept {
    return static_cast<std::size_t>(std::distance(F.begin(), std::max_element(F.begin(), F.end())));
  }
};

/// Interior point of a fresh bracket [v1, v3].
inline double golden_interior(double v1, double v3) {
  if (!(v1 < v3)) throw ConfigError("golden bracket requires v1 < v3");
  return v1 + (v3 - v1) * kGoldenFraction;
}

/// Evaluates F at v1, the golden interior point and v3 (three evaluations).
template <ObjectiveEvaluator E>
GoldenState golden_init(double v1, double v3, E& evaluator, double window = 0.0, EvaluationLog* log = nullptr) {
  const double v2 = golden_interior(v1, v3);
  GoldenState st;
  st.v = {v1, v2, v3};
  for (std::size_t i = 0; i < 3; ++i) {
    st.F[i] = detail::evaluate_logged(evaluator, st.v[i], window, Phase::golden, log);
  }
  return st;
}

/// Probes the golden point of the larger sub-interval and keeps the sub-bracket
/// around the better interior value. The width shrinks by kGoldenRatio.
template <ObjectiveEvaluator E>
GoldenState golden_step(const GoldenState& st, E& evaluator, double window = 0.0, EvaluationLog* log = nullptr) {
  const auto [a, b, c] = st.v;
  const auto [Fa, Fb, Fc] = st.F;
  GoldenState next;
  if (c - b >= b - a) {
    const double x = b + kGoldenFraction * (c - b);
    const double Fx = detail::evaluate_logged(evaluator, x, window, Phase::golden, log);
    if (Fx > Fb) {
      next.v = {b, x, c};
      next.F = {Fb, Fx, Fc};
    } else {
      next.v = {a, b, x};
      next.F = {Fa, Fb, Fx};
    }
  } else {
    const double x = b - kGoldenFraction * (b - a);
    const double Fx = detail::evaluate_logged(evaluator, x, window, Phase::golden, log);
    if (Fx > Fb) {
      next.v = {a, x, b};
      next.F = {Fa, Fx, Fb};
    } else {
      next.v = {x, b, c};
      next.F = {Fx, Fb, Fc};
    }
  }
  return next;
}

/// Number of golden steps needed to bring width below tol.
inline int golden_steps_needed(double width, double tol) {
  int n = 0;
  while (width >= tol) {
    width *= kGoldenRatio;
    ++n;
  }
  return n;
}

struct NewtonState {
  double center = 0.0;
  double h = 0.05;
  double window = 100.0;
};

struct NewtonResult {
  double vbar = 0.0;       // vertex, or the unchanged center when non-concave
  double F_minus = 0.0;
  double F_center = 0.0;
  double F_plus = 0.0;
  double F_vertex = 0.0;   // parabola value at vbar
  bool concave = false;
};

/// Value at x of the parabola through (c-h, Fm), (c, F0), (c+h, Fp).
inline double parabola_value(double center, double h, double Fm, double F0, double Fp, double x) {
  const double d = x - center;
  return F0 + (Fp - Fm) / (2.0 * h) * d + (Fp - 2.0 * F0 + Fm) / (2.0 * h * h) * d * d;
}

/// Vertex of the parabola through (c-h, Fm), (c, F0), (c+h, Fp). Returns
/// concave=false (and the center) if the second difference is not negative.
inline NewtonResult parabola_vertex(double center, double h, double Fm, double F0, double Fp) {
  NewtonResult r{center, Fm, F0, Fp, F0, false};
  const double second = Fp - 2.0 * F0 + Fm;
  if (!(second < 0.0)) return r;
  r.vbar = center - h * (Fp - Fm) / (2.0 * second);
  r.F_vertex = parabola_value(center, h, Fm, F0, Fp, r.vbar);
  r.concave = true;
  return r;
}

template <ObjectiveEvaluator E>
NewtonResult newton_step(const NewtonState& st, E& evaluator, EvaluationLog* log = nullptr) {
  if (!(st.h > 0.0)) throw ConfigError("Newton finite-difference step h must be positive");
  const double Fm = detail::evaluate_logged(evaluator, st.center - st.h, st.window, Phase::newton, log);
  const double F0 = detail::evaluate_logged(evaluator, st.center, st.window, Phase::newton, log);
  const double Fp = detail::evaluate_logged(evaluator, st.center + st.h, st.window, Phase::newton, log);
  return parabola_vertex(st.center, st.h, Fm, F0, Fp);
}

struct OptimizeOptions {
  double tol = 0.2;
  double h = 0.05;
  double window_golden = 25.0;
  double window_newton = 100.0;
  int newton_steps = 1;
};

struct OptimizeResult {
  double vbar = 0.0;
  double F = 0.0;
  GoldenState bracket;
  int golden_evaluations = 0;
  int newton_evaluations = 0;
  std::vector<NewtonResult> newton;
  EvaluationLog log;
};

/// Golden phase until the bracket is narrower than tol, then Newton steps
/// started from the best bracket point. Newton iterates are kept inside the
/// final bracket.
template <ObjectiveEvaluator E>
OptimizeResult optimize(double v1, double v3, const OptimizeOptions& opt, E& evaluator) {
  if (!(opt.tol > 0.0)) throw ConfigError("golden tolerance must be positive");
  if (opt.newton_steps < 0) throw ConfigError("newton_steps must be non-negative");
  OptimizeResult res;
  GoldenState st = golden_init(v1, v3, evaluator, opt.window_golden, &res.log);
  while (st.width() >= opt.tol) {
    st = golden_step(st, evaluator, opt.window_golden, &res.log);
  }
  res.bracket = st;
  res.golden_evaluations = static_cast<int>(res.log.size());

  const std::size_t best = st.best_index();
  res.vbar = st.v[best];
  res.F = st.F[best];
  for (int k = 0; k < opt.newton_steps; ++k) {
    NewtonResult nr = newton_step(NewtonState{res.vbar, opt.h, opt.window_newton}, evaluator, &res.log);
    if (nr.concave) {
      nr.vbar = std::clamp(nr.vbar, st.v[0], st.v[2]);
      nr.F_vertex = parabola_value(res.vbar, opt.h, nr.F_minus, nr.F_center, nr.F_plus, nr.vbar);
      res.vbar = nr.vbar;
      res.F = nr.F_vertex;
    } else {
      res.F = nr.F_center;
    }
    res.newton.push_back(nr);
  }
  res.newton_evaluations = static_cast<int>(res.log.size()) - res.golden_evaluations;
  return res;
}

}  // namespace chemostat_es
