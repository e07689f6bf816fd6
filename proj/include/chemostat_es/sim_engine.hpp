#pragma once

// Fixed-step RK4 integration of the chemostat coupled with a controller hook.
// Delayed controller terms are read once per step (method of steps).

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>
#include <utility>
#include <algorithm>
#include <string>
#include <vector>

#include "chemostat_es/controller_hook.hpp"
#include "chemostat_es/errors.hpp"
#include "chemostat_es/noise.hpp"
#include "chemostat_es/plant.hpp"

namespace chemostat_es {

struct SimConfig {
  double dt = 1e-2;
  double t_end = 5000.0;
  int sample_every = 100;
  double delay_tau = 75.0;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) throw ConfigError("dt and t_end must be positive");
  if (cfg.sample_every < 1) throw ConfigError("sample_every must be at least 1");
  if (!(cfg.delay_tau >= 0.0)) throw ConfigError("delay_tau must be non-negative");
}

/// Number of fixed steps covering a duration that must be a multiple of dt.
inline std::int64_t whole_steps(double duration, double dt) {
  const double ratio = duration / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("duration must be an integer multiple of the time step");
  }
  return static_cast<std::int64_t>(rounded);
}

/// One recorded sample: plant state, measurement, input and controller reference.
struct Sample {
  double t = 0.0;
  double s = 0.0;
  double b = 0.0;
  double y = 0.0;
  double u = 0.0;
  double Dbar = 0.0;
  double sbar = 0.0;
  double Fhat = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Trajectory {
  std::vector<Sample> rows;

  bool empty() const noexcept { return rows.empty(); }
  std::size_t size() const noexcept { return rows.size(); }

  void append(const Trajectory& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline constexpr const char* kTrajectoryHeader = "t,s,b,y,u,Dbar,sbar,Fhat";

inline void write_csv(std::ostream& out, const Trajectory& traj) {
  out << kTrajectoryHeader << '\n';
  out << std::setprecision(17);
  for (const auto& r : traj.rows) {
    out << r.t << ',' << r.s << ',' << r.b << ',' << r.y << ',' << r.u << ',' << r.Dbar << ',' << r.sbar << ','
        << r.Fhat << '\n';
  }
}

inline Trajectory read_csv(std::istream& in) {
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("trajectory CSV is empty (missing header)");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) {
    throw ConfigError("trajectory CSV header mismatch: '" + line + "'");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 8> v{};
    std::istringstream fields(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(fields, cell, ',')) {
      if (n >= v.size()) throw ConfigError("too many columns on line " + std::to_string(lineno));
      try {
        std::size_t used = 0;
        v[n] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("malformed number '" + cell + "' on line " + std::to_string(lineno));
      }
      ++n;
    }
    if (n != v.size()) throw ConfigError("expected 8 columns on line " + std::to_string(lineno));
    traj.rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
  }
  return traj;
}

/// Stateful closed-loop simulation. Time is kept as an integer step count so
/// that long runs do not accumulate rounding in t.
template <ControllerHook Controller>
class Simulation {
public:
  using ControllerState = typename Controller::State;
  static constexpr std::size_t kControllerDim = std::tuple_size_v<ControllerState>;
  using FullState = std::array<double, 2 + kControllerDim>;

  Simulation(PlantParams plant, PlantState ic, Controller controller, double dt, NoiseParams noise,
             double t0 = 0.0)
      : plant_(std::move(plant)), controller_(std::move(controller)), noise_(noise), dt_(dt), t0_(t0) {
    validate(plant_);
    validate(noise_);
    if (!(dt_ > 0.0)) throw ConfigError("dt must be positive");
    state_[0] = ic.s;
    state_[1] = ic.b;
    const auto xc = controller_.initial_state();
    for (std::size_t i = 0; i < kControllerDim; ++i) state_[2 + i] = xc[i];
  }

  double time() const noexcept { return t0_ + static_cast<double>(step_) * dt_; }
  std::int64_t step_count() const noexcept { return step_; }
  double dt() const noexcept { return dt_; }
  PlantState plant_state() const noexcept { return {state_[0], state_[1]}; }
  ControllerState controller_state() const noexcept { return split(state_); }
  Controller& controller() noexcept { return controller_; }
  const PlantParams& plant() const noexcept { return plant_; }
  const NoiseParams& noise() const noexcept { return noise_; }

  /// Snapshot at the current grid time.
  Sample sample() const {
    const double t = time();
    const auto xc = split(state_);
    const double y = measure_at({state_[0], state_[1]}, t);
    const double u = controller_.input(y, xc);
    const Reference ref = controller_.reference(y, xc);
    return {t, state_[0], state_[1], y, u, ref.Dbar, ref.sbar, ref.Fhat};
  }

  /// Advance one RK4 step.
  void step() {
    const double t = time();
    controller_.begin_step(t, split(state_));
    FullState k1{};
    FullState k2{};
    FullState k3{};
    FullState k4{};
    try {
      k1 = rhs(t, state_);
      k2 = rhs(t + 0.5 * dt_, axpy(state_, 0.5 * dt_, k1));
      k3 = rhs(t + 0.5 * dt_, axpy(state_, 0.5 * dt_, k2));
      k4 = rhs(t + dt_, axpy(state_, dt_, k3));
    } catch (const DomainError& e) {
      // A stage state went non-finite before the end-of-step check saw it.
      std::ostringstream msg;
      msg << "integration left the model domain at t=" << std::setprecision(17) << t << " (" << e.what() << ")";
      throw NumericalAbort(msg.str(), t);
    }
    FullState next{};
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = state_[i] + dt_ / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    const auto projected = controller_.project(split(next));
    for (std::size_t i = 0; i < kControllerDim; ++i) next[2 + i] = projected[i];
    ++step_;
    for (double v : next) {
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-finite state at t=" << std::setprecision(17) << time();
        throw NumericalAbort(msg.str(), time());
      }
    }
    state_ = next;
  }

  /// Advance n steps, calling on_sample(sample) at the start of each step
  /// (i.e. for the grid times t, t+dt, ..., t+(n-1)dt).
  template <class OnSample>
  void run(std::int64_t n, OnSample&& on_sample) {
    for (std::int64_t i = 0; i < n; ++i) {
      on_sample(sample());
      step();
    }
  }

private:
  double measure_at(const PlantState& x, double t) const {
    if (noise_.kind == NoiseKind::none) return x.s;
    return measure(x, t, noise_);
  }

  static ControllerState split(const FullState& x) {
    ControllerState xc{};
    for (std::size_t i = 0; i < kControllerDim; ++i) xc[i] = x[2 + i];
    return xc;
  }

  static FullState axpy(const FullState& x, double a, const FullState& k) {
    FullState out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + a * k[i];
    return out;
  }

  FullState rhs(double t, const FullState& x) const {
    const PlantState ps{x[0], x[1]};
    const auto xc = split(x);
    const double y = measure_at(ps, t);
    const double u = controller_.input(y, xc);
    const PlantState dp = plant_rhs(ps, u, plant_);
    const auto dc = controller_.derivative(y, xc);
    FullState dx{};
    dx[0] = dp.s;
    dx[1] = dp.b;
    for (std::size_t i = 0; i < kControllerDim; ++i) dx[2 + i] = dc[i];
    return dx;
  }

  PlantParams plant_;
  Controller controller_;
  NoiseParams noise_;
  double dt_;
  double t0_;
  std::int64_t step_ = 0;
  FullState state_{};
};

/// Simulate [0, t_end] and record every sample_every-th grid point, including both ends.
template <ControllerHook Controller>
Trajectory integrate(const PlantParams& plant, const PlantState& ic, Controller controller, const SimConfig& cfg,
                     const NoiseParams& noise) {
  validate(cfg);
  Simulation<Controller> sim(plant, ic, std::move(controller), cfg.dt, noise);
  const auto n = static_cast<std::int64_t>(std::floor(cfg.t_end / cfg.dt + 1e-9));
  Trajectory traj;
  traj.rows.reserve(static_cast<std::size_t>(n / cfg.sample_every + 1));
  std::int64_t i = 0;
  sim.run(n, [&](const Sample& s) {
    if (i++ % cfg.sample_every == 0) traj.rows.push_back(s);
  });
  if (n % cfg.sample_every == 0) traj.rows.push_back(sim.sample());
  return traj;
}

}  // namespace chemostat_es
