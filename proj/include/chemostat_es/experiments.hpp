#pragma once

// Scheme drivers, summaries and plot-ready data. This layer may consult the
// oracle for reporting; the controllers it drives never do.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chemostat_es/act_and_wait.hpp"
#include "chemostat_es/config.hpp"
#include "chemostat_es/continuous_controller.hpp"
#include "chemostat_es/discrete_optimizer.hpp"
#include "chemostat_es/errors.hpp"
#include "chemostat_es/feedback.hpp"
#include "chemostat_es/history_buffer.hpp"
#include "chemostat_es/oracle.hpp"
#include "chemostat_es/sim_engine.hpp"

namespace chemostat_es {

/// Ordered key = value lines.
struct Summary {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(std::string key, std::string value) { entries.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, double value) { add(std::move(key), detail::format_double(value)); }
  void add(std::string key, int value) { add(std::move(key), std::to_string(value)); }
  void add(std::string key, bool value) { add(std::move(key), std::string(value ? "true" : "false")); }

  std::optional<std::string> get(std::string_view key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return v;
    }
    return std::nullopt;
  }
};

inline void write_summary(std::ostream& out, const Summary& s) {
  for (const auto& [k, v] : s.entries) out << k << " = " << v << '\n';
}

struct WindowStats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

/// Mean and standard deviation of a column over samples with t >= t_from.
template <class Field>
WindowStats tail_stats(const Trajectory& traj, double t_from, Field field) {
  WindowStats w;
  double sum = 0.0;
  for (const auto& r : traj.rows) {
    if (r.t >= t_from) {
      sum += field(r);
      ++w.count;
    }
  }
  if (w.count == 0) return w;
  w.mean = sum / static_cast<double>(w.count);
  double ss = 0.0;
  for (const auto& r : traj.rows) {
    if (r.t >= t_from) ss += (field(r) - w.mean) * (field(r) - w.mean);
  }
  w.std = std::sqrt(ss / static_cast<double>(w.count));
  return w;
}

// ---------------------------------------------------------------- continuous

struct ContinuousResult {
  Trajectory trajectory;
  double t_end = 0.0;
  double y_hat = 0.0;      // final-window mean of sbar
  double sbar_std = 0.0;   // final-window std of sbar
  double Dbar_mean = 0.0;  // final-window mean of Dbar
  std::optional<double> s_star;
  std::optional<double> abs_error;
  std::optional<double> reference_sbar_std;  // paired run at the reference epsilon
  std::optional<double> oscillation_ratio;
  bool oscillating = false;
};

inline Trajectory simulate_continuous(const ExperimentConfig& cfg) {
  validate(cfg);
  ContinuousController ctrl(cfg.gains, cfg.plant.s_in, cfg.sbar_bounds(), cfg.initial_controller(),
                            delay_steps(cfg.sim.delay_tau, cfg.sim.dt));
  return integrate(cfg.plant, cfg.initial_plant(), std::move(ctrl), cfg.sim, cfg.noise);
}

namespace detail {

inline void fill_continuous_stats(ContinuousResult& r, const ExperimentConfig& cfg) {
  r.t_end = r.trajectory.empty() ? 0.0 : r.trajectory.rows.back().t;
  const double from = r.t_end * (1.0 - cfg.report.final_fraction);
  const auto sbar = tail_stats(r.trajectory, from, [](const Sample& s) { return s.sbar; });
  const auto Dbar = tail_stats(r.trajectory, from, [](const Sample& s) { return s.Dbar; });
  r.y_hat = sbar.mean;
  r.sbar_std = sbar.std;
  r.Dbar_mean = Dbar.mean;
}

}  // namespace detail

/// Simulates the continuous scheme and summarizes its final window. When the
/// configured epsilon differs from the reference one, a paired run with the
/// same seed is used to flag sustained oscillation of sbar.
inline ContinuousResult run_continuous(const ExperimentConfig& cfg) {
  ContinuousResult r;
  r.trajectory = simulate_continuous(cfg);
  detail::fill_continuous_stats(r, cfg);
  if (cfg.report.oracle) {
    r.s_star = oracle::phi_opt(cfg.plant).s_star;
    r.abs_error = std::abs(r.y_hat - *r.s_star);
  }
  if (cfg.gains.epsilon != cfg.report.reference_epsilon) {
    ExperimentConfig ref = cfg;
    ref.gains.epsilon = cfg.report.reference_epsilon;
    ContinuousResult base;
    base.trajectory = simulate_continuous(ref);
    detail::fill_continuous_stats(base, ref);
    r.reference_sbar_std = base.sbar_std;
    r.oscillation_ratio = base.sbar_std > 0.0 ? r.sbar_std / base.sbar_std : (r.sbar_std > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    r.oscillating = *r.oscillation_ratio >= cfg.report.oscillation_factor;
  }
  return r;
}

inline Summary summarize(const ContinuousResult& r, const ExperimentConfig& cfg) {
  Summary s;
  s.add("scheme", std::string("continuous"));
  s.add("seed", std::to_string(cfg.noise.seed));
  s.add("noise", std::string(to_string(cfg.noise.kind)));
  s.add("epsilon", cfg.gains.epsilon);
  s.add("delay_tau", cfg.sim.delay_tau);
  s.add("t_end", r.t_end);
  s.add("y_hat", r.y_hat);
  s.add("Dbar_mean", r.Dbar_mean);
  s.add("sbar_std", r.sbar_std);
  if (r.s_star) s.add("s_star", *r.s_star);
  if (r.abs_error) s.add("abs_error", *r.abs_error);
  if (r.reference_sbar_std) {
    s.add("reference_epsilon", cfg.report.reference_epsilon);
    s.add("reference_sbar_std", *r.reference_sbar_std);
    s.add("oscillation_ratio", *r.oscillation_ratio);
  }
  s.add("oscillating", r.oscillating);
  return s;
}

// ------------------------------------------------------------------ discrete

struct DiscreteResult {
  OptimizeResult optimum;
  SettleResult apply;  // settle at the final vbar, closing the run
  Trajectory trajectory;
  double golden_end_t = 0.0;
  double t_end = 0.0;
  std::optional<double> s_star;
  std::optional<double> s_eq;  // oracle equilibrium for the final vbar
  std::optional<double> abs_error;
};

inline SettleCriterion settle_criterion(const DiscreteConfig& d, double window) {
  return {window, d.settle_ratio, d.settle_floor, d.min_windows, d.max_windows};
}

/// Both bracket ends must correspond to reference lines that meet the
/// admissible box [s_min, s_in) x [D_min, D_max].
inline void check_bracket(const ExperimentConfig& cfg) {
  const auto& g = cfg.gains;
  for (const double v : {cfg.discrete.v1, cfg.discrete.v3}) {
    if (!line_meets_box(v, g.G1, cfg.resolved_s_min(), cfg.plant.s_in, g.D_min, g.D_max)) {
      throw ConfigError("bracket end vbar=" + detail::format_double(v) + " is not admissible for the box");
    }
  }
}

inline DiscreteResult run_discrete(const ExperimentConfig& cfg) {
  validate(cfg);
  check_bracket(cfg);
  const DiscreteConfig& d = cfg.discrete;
  ActAndWaitPlant reactor(cfg.plant, cfg.initial_plant(), cfg.noise,
                          {cfg.sim.dt, cfg.gains.G1, cfg.gains.D_min, cfg.gains.D_max, cfg.sim.sample_every});
  ChemostatObjective objective(reactor, settle_criterion(d, d.t_inc_golden));
  const OptimizeOptions opt{d.tol, d.h, d.t_inc_golden, d.t_inc_newton, d.newton_steps};

  DiscreteResult r;
  r.optimum = optimize(d.v1, d.v3, opt, objective);
  r.golden_end_t = r.optimum.log[static_cast<std::size_t>(r.optimum.golden_evaluations) - 1].t_end;

  reactor.set_last_vbar(r.optimum.vbar);
  r.apply = reactor.settle(r.optimum.vbar, settle_criterion(d, d.t_inc_newton));
  r.optimum.log.push_back({Phase::apply, r.optimum.vbar, r.apply.u_mean * (cfg.plant.s_in - r.apply.y_mean),
                           r.apply.t_start, r.apply.t_end, r.apply.windows});
  reactor.record_final_sample();
  r.trajectory = reactor.trajectory();
  r.t_end = reactor.time();

  if (cfg.report.oracle) {
    r.s_star = oracle::phi_opt(cfg.plant).s_star;
    r.s_eq = oracle::equilibrium_solve(r.optimum.vbar, cfg.gains.G1, cfg.plant, {cfg.gains.D_min, cfg.gains.D_max}).s_eq;
    r.abs_error = std::abs(*r.s_eq - *r.s_star);
  }
  return r;
}

inline Summary summarize(const DiscreteResult& r, const ExperimentConfig& cfg) {
  Summary s;
  s.add("scheme", std::string("discrete"));
  s.add("seed", std::to_string(cfg.noise.seed));
  s.add("noise", std::string(to_string(cfg.noise.kind)));
  s.add("golden_evaluations", r.optimum.golden_evaluations);
  s.add("newton_evaluations", r.optimum.newton_evaluations);
  s.add("bracket_low", r.optimum.bracket.v[0]);
  s.add("bracket_high", r.optimum.bracket.v[2]);
  s.add("bracket_width", r.optimum.bracket.width());
  s.add("golden_end_t", r.golden_end_t);
  bool concave = true;
  for (const auto& n : r.optimum.newton) concave = concave && n.concave;
  s.add("newton_concave", concave);
  s.add("vbar_final", r.optimum.vbar);
  s.add("F_estimate", r.optimum.F);
  s.add("s_measured", r.apply.y_mean);
  s.add("u_measured", r.apply.u_mean);
  s.add("t_end", r.t_end);
  if (r.s_eq) s.add("s_eq", *r.s_eq);
  if (r.s_star) s.add("s_star", *r.s_star);
  if (r.abs_error) s.add("abs_error", *r.abs_error);
  return s;
}

// -------------------------------------------------------------------- oracle

inline Summary oracle_report(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto opt = oracle::phi_opt(cfg.plant);
  const double mu_star = cfg.plant.growth.mu(opt.s_star);
  const double gain = oracle::min_gain(cfg.plant);
  Summary s;
  s.add("growth", cfg.plant.growth.kind());
  s.add("s_in", cfg.plant.s_in);
  s.add("s_star", opt.s_star);
  s.add("phi_star", opt.phi_star);
  s.add("mu_star", mu_star);
  s.add("min_gain", gain);
  s.add("G1", cfg.gains.G1);
  s.add("gain_sufficient", cfg.gains.G1 > gain);
  s.add("vbar_star", saturate(mu_star, cfg.gains.D_min, cfg.gains.D_max) + cfg.gains.G1 * opt.s_star);
  return s;
}

// ----------------------------------------------------------------- plot data

enum class PlotKind { ds_plane, ts, sb_plane, io_plane };

inline PlotKind parse_plot_kind(std::string_view text) {
  if (text == "ds-plane") return PlotKind::ds_plane;
  if (text == "ts") return PlotKind::ts;
  if (text == "sb-plane") return PlotKind::sb_plane;
  if (text == "io-plane") return PlotKind::io_plane;
  throw ConfigError("unknown plot kind '" + std::string(text) + "' (ds-plane, ts, sb-plane, io-plane)");
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n' << std::setprecision(17);
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

/// Main table plus named overlays (written next to it as <stem>.<name>.csv).
struct PlotData {
  Table main;
  std::vector<std::pair<std::string, Table>> overlays;
};

inline PlotData emit_plot_data(const Trajectory& traj, PlotKind kind, const PlantParams& plant, int decimate = 1,
                               int grid = 200) {
  if (decimate < 1) throw ConfigError("decimate must be at least 1");
  if (grid < 1) throw ConfigError("grid must be at least 1");
  PlotData out;
  const auto opt = oracle::phi_opt(plant);
  const double mu_star = plant.growth.mu(opt.s_star);

  const auto mu_curve = [&] {
    Table t{{"s", "mu"}, {}};
    for (int i = 0; i <= grid; ++i) {
      const double s = plant.s_in * i / grid;
      t.rows.push_back({s, plant.growth.mu(s)});
    }
    return t;
  };

  switch (kind) {
    case PlotKind::ds_plane:
      out.main.columns = {"sbar", "Dbar"};
      out.overlays.emplace_back("mu", mu_curve());
      out.overlays.emplace_back("optimum", Table{{"s_star", "mu_star"}, {{opt.s_star, mu_star}}});
      break;
    case PlotKind::ts:
      out.main.columns = {"t", "s", "b", "y", "u", "Dbar", "sbar"};
      out.overlays.emplace_back("optimum", Table{{"s_star", "mu_star", "phi_star"}, {{opt.s_star, mu_star, opt.phi_star}}});
      break;
    case PlotKind::sb_plane: {
      out.main.columns = {"s", "b"};
      Table line{{"s", "b"}, {}};
      for (int i = 0; i <= grid; ++i) {
        const double s = plant.s_in * i / grid;
        line.rows.push_back({s, plant.s_in - s});
      }
      out.overlays.emplace_back("invariant", std::move(line));
      out.overlays.emplace_back("optimum", Table{{"s_star", "b_star"}, {{opt.s_star, plant.s_in - opt.s_star}}});
      break;
    }
    case PlotKind::io_plane:
      out.main.columns = {"y", "u"};
      out.overlays.emplace_back("mu", mu_curve());
      out.overlays.emplace_back("optimum", Table{{"s_star", "mu_star"}, {{opt.s_star, mu_star}}});
      break;
  }

  for (std::size_t i = 0; i < traj.rows.size(); i += static_cast<std::size_t>(decimate)) {
    const Sample& r = traj.rows[i];
    switch (kind) {
      case PlotKind::ds_plane:
        out.main.rows.push_back({r.sbar, r.Dbar});
        break;
      case PlotKind::ts:
        out.main.rows.push_back({r.t, r.s, r.b, r.y, r.u, r.Dbar, r.sbar});
        break;
      case PlotKind::sb_plane:
        out.main.rows.push_back({r.s, r.b});
        break;
      case PlotKind::io_plane:
        out.main.rows.push_back({r.y, r.u});
        break;
    }
  }
  return out;
}

// ----------------------------------------------------------------- file I/O

/// Inserts a tag before the extension: out/run.csv -> out/run.seed7.csv.
inline std::string tagged_path(const std::string& path, const std::string& tag) {
  if (path.empty() || tag.empty()) return path;
  const std::filesystem::path p(path);
  std::filesystem::path out = p.parent_path() / (p.stem().string() + "." + tag + p.extension().string());
  return out.string();
}

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

inline Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory file '" + path + "'");
  return read_csv(in);
}

inline void write_plot_data(const std::string& path, const PlotData& data) {
  write_file(path, [&](std::ostream& o) { write_csv(o, data.main); });
  for (const auto& [name, table] : data.overlays) {
    write_file(tagged_path(path, name), [&](std::ostream& o) { write_csv(o, table); });
  }
}

}  // namespace chemostat_es
