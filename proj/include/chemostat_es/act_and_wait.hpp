#pragma once

// Act-and-wait evaluation of the equilibrium objective on a physical plant:
// apply u = sat(vbar - G1 y), simulate window by window until the output
// statistics settle, and read F = mean(u) (s_in - mean(y)) off the last window.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>

#include "chemostat_es/continuous_controller.hpp"
#include "chemostat_es/controller_hook.hpp"
#include "chemostat_es/discrete_optimizer.hpp"
#include "chemostat_es/errors.hpp"
#include "chemostat_es/feedback.hpp"
#include "chemostat_es/sim_engine.hpp"

namespace chemostat_es {

/// Static feedback hook. Logs the reference pair on the line Dbar + G1 sbar = vbar
/// through the current output: sbar = y, Dbar = u.
class StaticFeedbackController {
public:
  using State = std::array<double, 0>;

  StaticFeedbackController(SingleParamFeedback law, double s_in) : law_(law), s_in_(s_in) {}

  State initial_state() const { return {}; }
  void begin_step(double, const State&) {}
  double input(double y, const State&) const { return law_(y); }
  State derivative(double, const State&) const { return {}; }
  State project(const State& x) const { return x; }
  Reference reference(double y, const State&) const {
    const double u = law_(y);
    return {u, y, quasi_objective(u, y, s_in_)};
  }

private:
  SingleParamFeedback law_;
  double s_in_;
};

static_assert(ControllerHook<StaticFeedbackController>);

/// Settling test on consecutive windows of the measured output.
struct SettleCriterion {
  double window = 25.0;
  double ratio = 0.9;   // settled once std_k >= ratio * std_{k-1}
  double floor = 1e-6;  // or once std_k < floor
  int min_windows = 2;
  int max_windows = 40;
};

inline void validate(const SettleCriterion& c) {
  if (!(c.window > 0.0)) throw ConfigError("settle window must be positive");
  if (!(c.ratio > 0.0)) throw ConfigError("settle ratio must be positive");
  if (!(c.floor >= 0.0)) throw ConfigError("settle floor must be non-negative");
  if (c.min_windows < 1 || c.max_windows < c.min_windows) throw ConfigError("need 1 <= min_windows <= max_windows");
}

struct SettleResult {
  double y_mean = 0.0;
  double u_mean = 0.0;
  double y_std = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  int windows = 0;

  double t_used() const noexcept { return t_end - t_start; }
};

/// A chemostat under static feedback whose state persists across evaluations,
/// the way a physical reactor would. Records a decimated trajectory of
/// everything it simulates.
class ActAndWaitPlant {
public:
  struct Options {
    double dt = 1e-2;
    double G1 = 1.0;
    double D_min = 0.0;
    double D_max = 1.0;
    int sample_every = 100;
  };

  ActAndWaitPlant(PlantParams plant, PlantState ic, NoiseParams noise, Options opt)
      : plant_(std::move(plant)), state_(ic), noise_(noise), opt_(opt) {
    validate(plant_);
    validate(noise_);
    if (!(opt_.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(opt_.G1 > 0.0)) throw ConfigError("G1 must be positive");
    if (!(opt_.D_min < opt_.D_max)) throw ConfigError("dilution bounds inverted");
    if (opt_.sample_every < 1) throw ConfigError("sample_every must be at least 1");
  }

  double time() const noexcept { return static_cast<double>(step_) * opt_.dt; }
  const PlantState& state() const noexcept { return state_; }
  const Trajectory& trajectory() const noexcept { return traj_; }
  const Options& options() const noexcept { return opt_; }
  double s_in() const noexcept { return plant_.s_in; }

  SettleResult settle(double vbar, const SettleCriterion& crit) {
    validate(crit);
    const SingleParamFeedback law{vbar, opt_.G1, opt_.D_min, opt_.D_max};
    Simulation<StaticFeedbackController> sim(plant_, state_, StaticFeedbackController(law, plant_.s_in), opt_.dt,
                                             noise_, time());
    const std::int64_t n = whole_steps(crit.window, opt_.dt);
    SettleResult res;
    res.t_start = time();
    double previous_std = std::numeric_limits<double>::infinity();
    double before_last = previous_std;
    for (int k = 1; k <= crit.max_windows; ++k) {
      double sum_y = 0.0;
      double sum_yy = 0.0;
      double sum_u = 0.0;
      sim.run(n, [&](const Sample& s) {
        sum_y += s.y;
        sum_yy += s.y * s.y;
        sum_u += s.u;
        if (step_ % opt_.sample_every == 0) traj_.rows.push_back(s);
        ++step_;
      });
      state_ = sim.plant_state();
      const double count = static_cast<double>(n);
      const double mean = sum_y / count;
      const double var = std::max(0.0, sum_yy / count - mean * mean);
      res.y_mean = mean;
      res.u_mean = sum_u / count;
      res.y_std = std::sqrt(var);
      res.windows = k;
      res.t_end = time();
      if (k >= crit.min_windows && (res.y_std < crit.floor || res.y_std >= crit.ratio * previous_std)) {
        return res;
      }
      before_last = previous_std;
      previous_std = res.y_std;
    }
    std::ostringstream msg;
    msg << "output did not settle for vbar=" << vbar << " after " << crit.max_windows << " windows (last std "
        << res.y_std << ", previous " << before_last << ")";
    throw SettleTimeout(msg.str(), res.y_std, before_last, crit.max_windows);
  }

  /// Appends the current sample (used to close a recorded trajectory).
  void record_final_sample() {
    const SingleParamFeedback law{last_vbar_.value_or(0.0), opt_.G1, opt_.D_min, opt_.D_max};
    Simulation<StaticFeedbackController> sim(plant_, state_, StaticFeedbackController(law, plant_.s_in), opt_.dt,
                                             noise_, time());
    traj_.rows.push_back(sim.sample());
  }

  void set_last_vbar(double v) { last_vbar_ = v; }

private:
  PlantParams plant_;
  PlantState state_;
  NoiseParams noise_;
  Options opt_;
  std::int64_t step_ = 0;
  Trajectory traj_;
  std::optional<double> last_vbar_;
};

/// Standalone settle from a given initial condition.
struct SettleOutcome {
  double s_ss = 0.0;
  double u_ss = 0.0;
  double t_used = 0.0;
  int windows = 0;
};

inline SettleOutcome settle(const PlantParams& plant, const PlantState& ic, double vbar, double G1,
                            const SettleCriterion& crit, const NoiseParams& noise = no_noise(), double dt = 1e-2,
                            double D_min = 0.0, double D_max = 1.0) {
  ActAndWaitPlant reactor(plant, ic, noise, {dt, G1, D_min, D_max, 1 << 30});
  const SettleResult r = reactor.settle(vbar, crit);
  return {r.y_mean, r.u_mean, r.t_used(), r.windows};
}

/// eval_F: act-and-wait objective evaluator on a continuing plant. Only the
/// window means of y and u enter the objective.
class ChemostatObjective {
public:
  ChemostatObjective(ActAndWaitPlant& reactor, SettleCriterion base) : reactor_(&reactor), base_(base) {}

  ObjectiveSample operator()(double vbar, double window) {
    SettleCriterion crit = base_;
    if (window > 0.0) crit.window = window;
    reactor_->set_last_vbar(vbar);
    last_ = reactor_->settle(vbar, crit);
    return {last_.u_mean * (reactor_->s_in() - last_.y_mean), last_.t_start, last_.t_end, last_.windows};
  }

  const SettleResult& last() const noexcept { return last_; }

private:
  ActAndWaitPlant* reactor_;
  SettleCriterion base_;
  SettleResult last_;
};

static_assert(ObjectiveEvaluator<ChemostatObjective>);

}  // namespace chemostat_es
