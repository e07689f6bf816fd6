// Command-line experiment runner.
//
//   chemostat_es simulate-continuous [-c cfg] [--seed N] [--repeat N] ...
//   chemostat_es optimize-discrete   [-c cfg] [--seed N] [--repeat N] ...
//   chemostat_es oracle              [-c cfg]
//   chemostat_es plot-data --input traj.csv --kind ds-plane --output plot.csv
//
// Exit codes: 0 ok, 2 config or I/O error, 3 numerical abort, 4 settle timeout.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "chemostat_es/chemostat_es.hpp"

namespace ces = chemostat_es;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitSettle = 4;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  int repeat = 1;
  int threads = 0;
  bool dump_config = false;
  std::string trajectory;
  std::string evaluations;
  std::string summary;
};

ces::ExperimentConfig load(const CommonOptions& o) {
  ces::ExperimentConfig cfg =
      o.config_path.empty() ? ces::parse_config(std::string(), o.overrides) : ces::load_config(o.config_path, o.overrides);
  if (o.seed) cfg.noise.seed = *o.seed;
  if (!o.trajectory.empty()) cfg.output.trajectory = o.trajectory;
  if (!o.evaluations.empty()) cfg.output.evaluations = o.evaluations;
  if (!o.summary.empty()) cfg.output.summary = o.summary;
  return cfg;
}

void add_config_options(CLI::App& app, CommonOptions& o) {
  app.add_option("-c,--config", o.config_path, "Experiment config file (sectioned key = value)");
  app.add_option("--set", o.overrides, "Override a config entry, e.g. --set gains.epsilon=0.01");
  app.add_flag("--dump-config", o.dump_config, "Print the resolved config and exit");
}

void add_run_options(CLI::App& app, CommonOptions& o, bool discrete) {
  add_config_options(app, o);
  app.add_option("--seed", o.seed, "Noise seed (overrides noise.seed)");
  app.add_option("--repeat", o.repeat, "Run N experiments with seeds seed, seed+1, ...")->check(CLI::PositiveNumber);
  app.add_option("--threads", o.threads, "Worker threads for --repeat (0: hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--trajectory", o.trajectory, "Trajectory CSV path (overrides output.trajectory)");
  if (discrete) app.add_option("--evaluations", o.evaluations, "Evaluation log CSV path (overrides output.evaluations)");
  app.add_option("--summary", o.summary, "Summary path (overrides output.summary)");
}

struct RunOutput {
  ces::Summary summary;
  std::optional<double> abs_error;
};

RunOutput run_one(const ces::ExperimentConfig& cfg, bool discrete, const std::string& tag) {
  RunOutput out;
  if (discrete) {
    const auto r = ces::run_discrete(cfg);
    out.summary = ces::summarize(r, cfg);
    out.abs_error = r.abs_error;
    ces::write_file(ces::tagged_path(cfg.output.trajectory, tag),
                    [&](std::ostream& o) { ces::write_csv(o, r.trajectory); });
    ces::write_file(ces::tagged_path(cfg.output.evaluations, tag),
                    [&](std::ostream& o) { ces::write_csv(o, r.optimum.log); });
  } else {
    const auto r = ces::run_continuous(cfg);
    out.summary = ces::summarize(r, cfg);
    out.abs_error = r.abs_error;
    ces::write_file(ces::tagged_path(cfg.output.trajectory, tag),
                    [&](std::ostream& o) { ces::write_csv(o, r.trajectory); });
  }
  ces::write_file(ces::tagged_path(cfg.output.summary, tag), [&](std::ostream& o) { ces::write_summary(o, out.summary); });
  return out;
}

int run_scheme(const CommonOptions& o, bool discrete) {
  ces::ExperimentConfig base = load(o);
  base.scheme = discrete ? ces::Scheme::discrete : ces::Scheme::continuous;
  if (o.dump_config) {
    ces::emit(std::cout, base);
    return kExitOk;
  }
  if (o.repeat == 1) {
    ces::write_summary(std::cout, run_one(base, discrete, "").summary);
    return kExitOk;
  }

  const auto n = static_cast<std::size_t>(o.repeat);
  std::vector<std::optional<RunOutput>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      ces::ExperimentConfig cfg = base;
      cfg.noise.seed = base.noise.seed + i;
      try {
        results[i] = run_one(cfg, discrete, "seed" + std::to_string(cfg.noise.seed));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(n, o.threads > 0 ? static_cast<std::size_t>(o.threads) : hw);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<double> errs;
  for (std::size_t i = 0; i < n; ++i) {
    std::cout << "[run " << i << "]\n";
    if (results[i]) {
      ces::write_summary(std::cout, results[i]->summary);
      if (results[i]->abs_error) errs.push_back(*results[i]->abs_error);
    } else {
      std::cout << "status = failed\n";
    }
  }
  std::cout << "[aggregate]\nruns = " << n << "\n";
  if (!errs.empty()) {
    std::sort(errs.begin(), errs.end());
    const std::size_t m = errs.size();
    const double median = m % 2 ? errs[m / 2] : 0.5 * (errs[m / 2 - 1] + errs[m / 2]);
    std::cout << "abs_error_median = " << ces::detail::format_double(median) << "\n"
              << "abs_error_max = " << ces::detail::format_double(errs.back()) << "\n";
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return kExitOk;
}

int run_oracle(const CommonOptions& o) {
  const auto cfg = load(o);
  if (o.dump_config) {
    ces::emit(std::cout, cfg);
    return kExitOk;
  }
  ces::write_summary(std::cout, ces::oracle_report(cfg));
  return kExitOk;
}

struct PlotOptions {
  std::string input;
  std::string kind;
  std::string output;
  int decimate = 1;
  int grid = 200;
};

int run_plot(const CommonOptions& o, const PlotOptions& p) {
  const auto cfg = load(o);
  const auto kind = ces::parse_plot_kind(p.kind);
  const auto traj = ces::load_trajectory(p.input);
  const auto data = ces::emit_plot_data(traj, kind, cfg.plant, p.decimate, p.grid);
  ces::write_plot_data(p.output, data);
  std::cout << "rows = " << data.main.rows.size() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extremum-seeking control of a chemostat: simulations, optimization and reference values"};
  app.require_subcommand(1);

  CommonOptions cont_opts;
  CommonOptions disc_opts;
  CommonOptions oracle_opts;
  CommonOptions plot_common;
  PlotOptions plot_opts;

  auto* cont = app.add_subcommand("simulate-continuous", "Run the continuous extremum-seeking scheme");
  add_run_options(*cont, cont_opts, false);
  auto* disc = app.add_subcommand("optimize-discrete", "Run the golden-section/Newton act-and-wait scheme");
  add_run_options(*disc, disc_opts, true);
  auto* orc = app.add_subcommand("oracle", "Print the optimum, the objective there and the minimal gain");
  add_config_options(*orc, oracle_opts);
  auto* plot = app.add_subcommand("plot-data", "Turn a trajectory CSV into plot-ready CSVs with overlays");
  add_config_options(*plot, plot_common);
  plot->add_option("--input", plot_opts.input, "Trajectory CSV")->required();
  plot->add_option("--kind", plot_opts.kind, "ds-plane | ts | sb-plane | io-plane")->required();
  plot->add_option("--output", plot_opts.output, "Output CSV; overlays go to <stem>.<name>.csv")->required();
  plot->add_option("--decimate", plot_opts.decimate, "Keep every N-th row")->check(CLI::PositiveNumber);
  plot->add_option("--grid", plot_opts.grid, "Grid intervals for overlay curves")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*cont) return run_scheme(cont_opts, false);
    if (*disc) return run_scheme(disc_opts, true);
    if (*orc) return run_oracle(oracle_opts);
    if (*plot) return run_plot(plot_common, plot_opts);
  } catch (const ces::NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ces::SettleTimeout& e) {
    std::cerr << "settle timeout: " << e.what() << "\n";
    return kExitSettle;
  } catch (const ces::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ces::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
