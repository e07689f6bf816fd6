#pragma once

// Experiment configuration as a sectioned key = value file. Every key has a
// default, so an empty file describes the reference Haldane experiment.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "chemostat_es/continuous_controller.hpp"
#include "chemostat_es/errors.hpp"
#include "chemostat_es/feedback.hpp"
#include "chemostat_es/growth_models.hpp"
#include "chemostat_es/noise.hpp"
#include "chemostat_es/plant.hpp"
#include "chemostat_es/sim_engine.hpp"

namespace chemostat_es {

enum class Scheme { continuous, discrete };

inline std::string_view to_string(Scheme s) { return s == Scheme::continuous ? "continuous" : "discrete"; }

inline Scheme parse_scheme(std::string_view text) {
  if (text == "continuous") return Scheme::continuous;
  if (text == "discrete") return Scheme::discrete;
  throw ConfigError("unknown scheme '" + std::string(text) + "'");
}

struct DiscreteConfig {
  double v1 = 0.04;
  double v3 = 1.0;
  double tol = 0.2;
  double h = 0.05;
  double t_inc_golden = 25.0;
  double t_inc_newton = 100.0;
  int newton_steps = 1;
  double settle_ratio = 0.9;
  double settle_floor = 1e-6;
  int min_windows = 2;
  int max_windows = 40;

  friend bool operator==(const DiscreteConfig&, const DiscreteConfig&) = default;
};

/// Unset entries resolve against s_in: s0 = b0 = sbar0 = s_in / 2.
struct InitialConfig {
  std::optional<double> s0;
  std::optional<double> b0;
  double Dbar0 = 0.5;
  std::optional<double> sbar0;

  friend bool operator==(const InitialConfig&, const InitialConfig&) = default;
};

/// Empty path: file not written.
struct OutputConfig {
  std::string trajectory;
  std::string evaluations;
  std::string summary;

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ReportConfig {
  double final_fraction = 0.1;
  bool oracle = true;
  // Paired run at this epsilon for the oscillation check; skipped when equal.
  double reference_epsilon = 1e-3;
  double oscillation_factor = 5.0;

  friend bool operator==(const ReportConfig&, const ReportConfig&) = default;
};

struct ExperimentConfig {
  PlantParams plant;
  FeedbackGains gains;
  std::optional<double> s_min;  // default 0.01 s_in
  SimConfig sim;
  NoiseParams noise;
  Scheme scheme = Scheme::continuous;
  DiscreteConfig discrete;
  InitialConfig ic;
  OutputConfig output;
  ReportConfig report;

  double resolved_s_min() const { return s_min.value_or(0.01 * plant.s_in); }
  SbarBounds sbar_bounds() const { return {resolved_s_min(), 0.99 * plant.s_in}; }
  PlantState initial_plant() const { return {ic.s0.value_or(0.5 * plant.s_in), ic.b0.value_or(0.5 * plant.s_in)}; }
  ContinuousControllerState initial_controller() const {
    return {ic.Dbar0, ic.sbar0.value_or(0.5 * plant.s_in)};
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline void validate(const ExperimentConfig& cfg) {
  validate(cfg.plant);
  validate(cfg.gains);
  validate(cfg.sim);
  validate(cfg.noise);
  const double s_in = cfg.plant.s_in;
  const SbarBounds b = cfg.sbar_bounds();
  if (!(b.lower > 0.0 && b.lower < b.upper)) throw ConfigError("s_min must lie in (0, 0.99 s_in)");
  delay_steps(cfg.sim.delay_tau, cfg.sim.dt);

  const PlantState x0 = cfg.initial_plant();
  if (!(x0.s >= 0.0 && x0.s <= s_in) || !(x0.b >= 0.0) || !std::isfinite(x0.b)) {
    throw ConfigError("initial state needs 0 <= s0 <= s_in and b0 >= 0");
  }
  const auto c0 = cfg.initial_controller();
  if (!(c0.Dbar >= cfg.gains.D_min && c0.Dbar <= cfg.gains.D_max)) throw ConfigError("Dbar0 outside [D_min, D_max]");
  if (!(c0.sbar > 0.0 && c0.sbar < s_in)) throw ConfigError("sbar0 outside (0, s_in)");

  const DiscreteConfig& d = cfg.discrete;
  if (!(d.v1 < d.v3)) throw ConfigError("discrete bracket requires v1 < v3");
  if (!(d.tol > 0.0) || !(d.h > 0.0)) throw ConfigError("tol and h must be positive");
  if (!(d.t_inc_golden > 0.0) || !(d.t_inc_newton > 0.0)) throw ConfigError("evaluation windows must be positive");
  if (cfg.scheme == Scheme::discrete) {
    whole_steps(d.t_inc_golden, cfg.sim.dt);
    whole_steps(d.t_inc_newton, cfg.sim.dt);
  }
  if (d.newton_steps < 0) throw ConfigError("newton_steps must be non-negative");
  if (!(d.settle_ratio > 0.0) || !(d.settle_floor >= 0.0)) throw ConfigError("invalid settle criterion");
  if (d.min_windows < 1 || d.max_windows < d.min_windows) throw ConfigError("need 1 <= min_windows <= max_windows");

  const ReportConfig& r = cfg.report;
  if (!(r.final_fraction > 0.0 && r.final_fraction <= 1.0)) throw ConfigError("final_fraction must be in (0, 1]");
  if (!(r.reference_epsilon > 0.0) || !(r.oscillation_factor > 0.0)) {
    throw ConfigError("reference_epsilon and oscillation_factor must be positive");
  }
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

inline double parse_double(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

inline long long parse_integer(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

inline int parse_int(const std::string& key, std::string_view text) {
  const long long v = parse_integer(key, text);
  if (v < -2147483647LL || v > 2147483647LL) throw ConfigError("key '" + key + "': integer out of range");
  return static_cast<int>(v);
}

inline std::uint64_t parse_u64(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + std::string(text) + "'");
}

inline std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  std::string cell;
  std::istringstream in{std::string(text)};
  while (std::getline(in, cell, ',')) out.push_back(parse_double(key, cell));
  return out;
}

struct GrowthFields {
  std::string kind = "haldane";
  std::optional<double> mu_max, K, K_i;
  std::optional<std::vector<double>> table_s, table_mu;
};

inline GrowthModel build_growth(const GrowthFields& f) {
  if (f.kind == "haldane") {
    if (f.table_s || f.table_mu) throw ConfigError("table_s/table_mu only apply to growth = tabulated");
    const HaldaneParams d{};
    return GrowthModel::haldane(f.mu_max.value_or(d.mu_max), f.K.value_or(d.K), f.K_i.value_or(d.K_i));
  }
  if (f.kind == "monod") {
    if (f.K_i || f.table_s || f.table_mu) throw ConfigError("growth = monod takes only mu_max and K");
    const MonodParams d{};
    return GrowthModel::monod(f.mu_max.value_or(d.mu_max), f.K.value_or(d.K));
  }
  if (f.kind == "tabulated") {
    if (f.mu_max || f.K || f.K_i) throw ConfigError("growth = tabulated takes only table_s and table_mu");
    if (!f.table_s || !f.table_mu) throw ConfigError("growth = tabulated requires table_s and table_mu");
    return GrowthModel(TabulatedGrowth(*f.table_s, *f.table_mu));
  }
  throw ConfigError("unknown growth kind '" + f.kind + "'");
}

}  // namespace detail

/// Builds a config from a parsed tree. Unknown sections or keys are errors.
inline ExperimentConfig config_from_tree(const boost::property_tree::ptree& tree) {
  using detail::parse_double;
  ExperimentConfig cfg;
  detail::GrowthFields growth;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const auto num = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_double(k, v); };
  };
  const auto opt = [](std::optional<double>& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_double(k, v); };
  };
  const auto integer = [](int& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = detail::parse_int(k, v); };
  };
  const auto text = [](std::string& field) -> Setter {
    return [&field](const std::string&, const std::string& v) { field = detail::trim(v); };
  };

  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"plant",
       {{"s_in", num(cfg.plant.s_in)},
        {"growth", text(growth.kind)},
        {"mu_max", opt(growth.mu_max)},
        {"K", opt(growth.K)},
        {"K_i", opt(growth.K_i)},
        {"table_s", [&](const std::string& k, const std::string& v) { growth.table_s = detail::parse_list(k, v); }},
        {"table_mu",
         [&](const std::string& k, const std::string& v) { growth.table_mu = detail::parse_list(k, v); }}}},
      {"gains",
       {{"G1", num(cfg.gains.G1)},
        {"G2", num(cfg.gains.G2)},
        {"epsilon", num(cfg.gains.epsilon)},
        {"D_min", num(cfg.gains.D_min)},
        {"D_max", num(cfg.gains.D_max)},
        {"s_min", opt(cfg.s_min)}}},
      {"sim",
       {{"dt", num(cfg.sim.dt)},
        {"t_end", num(cfg.sim.t_end)},
        {"delay_tau", num(cfg.sim.delay_tau)},
        {"sample_every", integer(cfg.sim.sample_every)}}},
      {"noise",
       {{"kind", [&](const std::string&, const std::string& v) { cfg.noise.kind = parse_noise_kind(detail::trim(v)); }},
        {"omega", num(cfg.noise.omega)},
        {"a", num(cfg.noise.a)},
        {"seed", [&](const std::string& k, const std::string& v) { cfg.noise.seed = detail::parse_u64(k, v); }}}},
      {"scheme", {{"type", [&](const std::string&, const std::string& v) { cfg.scheme = parse_scheme(detail::trim(v)); }}}},
      {"discrete",
       {{"v1", num(cfg.discrete.v1)},
        {"v3", num(cfg.discrete.v3)},
        {"tol", num(cfg.discrete.tol)},
        {"h", num(cfg.discrete.h)},
        {"t_inc_golden", num(cfg.discrete.t_inc_golden)},
        {"t_inc_newton", num(cfg.discrete.t_inc_newton)},
        {"newton_steps", integer(cfg.discrete.newton_steps)},
        {"settle_ratio", num(cfg.discrete.settle_ratio)},
        {"settle_floor", num(cfg.discrete.settle_floor)},
        {"min_windows", integer(cfg.discrete.min_windows)},
        {"max_windows", integer(cfg.discrete.max_windows)}}},
      {"ic",
       {{"s0", opt(cfg.ic.s0)}, {"b0", opt(cfg.ic.b0)}, {"Dbar0", num(cfg.ic.Dbar0)}, {"sbar0", opt(cfg.ic.sbar0)}}},
      {"output",
       {{"trajectory", text(cfg.output.trajectory)},
        {"evaluations", text(cfg.output.evaluations)},
        {"summary", text(cfg.output.summary)}}},
      {"report",
       {{"final_fraction", num(cfg.report.final_fraction)},
        {"oracle", [&](const std::string& k, const std::string& v) { cfg.report.oracle = detail::parse_bool(k, v); }},
        {"reference_epsilon", num(cfg.report.reference_epsilon)},
        {"oscillation_factor", num(cfg.report.oscillation_factor)}}},
  };

  for (const auto& [section, body] : tree) {
    const auto sit = schema.find(section);
    if (sit == schema.end()) {
      if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
      throw ConfigError("unknown section [" + section + "]");
    }
    std::set<std::string> seen;
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto kit = sit->second.find(key);
      if (kit == sit->second.end()) throw ConfigError("unknown key '" + full + "'");
      if (!seen.insert(key).second) throw ConfigError("duplicate key '" + full + "'");
      kit->second(full, value.data());
    }
  }
  cfg.plant.growth = detail::build_growth(growth);
  validate(cfg);
  return cfg;
}

/// Applies "section.key=value" overrides on top of a parsed tree.
inline void apply_overrides(boost::property_tree::ptree& tree, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    const auto dot = item.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 || dot + 1 == eq) {
      throw ConfigError("override '" + item + "' is not of the form section.key=value");
    }
    const std::string section = detail::trim(item.substr(0, dot));
    const std::string key = detail::trim(item.substr(dot + 1, eq - dot - 1));
    const std::string value = detail::trim(item.substr(eq + 1));
    auto it = tree.find(section);
    if (it == tree.not_found()) {
      tree.push_back({section, boost::property_tree::ptree()});
      it = tree.find(section);
    }
    it->second.put(boost::property_tree::ptree::path_type(key, '\0'), value);
  }
}

inline boost::property_tree::ptree read_tree(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return tree;
}

inline ExperimentConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {}) {
  auto tree = read_tree(in);
  apply_overrides(tree, overrides);
  return config_from_tree(tree);
}

inline ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {}) {
  std::istringstream in(text);
  return parse_config(in, overrides);
}

inline ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, overrides);
}

/// Writes every key; unset optionals are omitted so they keep resolving
/// against s_in. parse_config(emit(cfg)) == cfg.
inline void emit(std::ostream& out, const ExperimentConfig& cfg) {
  using detail::format_double;
  const auto kv = [&](std::string_view key, const std::string& value) { out << key << " = " << value << '\n'; };
  const auto num = [&](std::string_view key, double v) { kv(key, format_double(v)); };
  const auto opt = [&](std::string_view key, const std::optional<double>& v) {
    if (v) num(key, *v);
  };

  out << "[plant]\n";
  num("s_in", cfg.plant.s_in);
  kv("growth", cfg.plant.growth.kind());
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HaldaneParams>) {
          num("mu_max", p.mu_max);
          num("K", p.K);
          num("K_i", p.K_i);
        } else if constexpr (std::is_same_v<T, MonodParams>) {
          num("mu_max", p.mu_max);
          num("K", p.K);
        } else {
          kv("table_s", detail::format_list(p.knots()));
          kv("table_mu", detail::format_list(p.values()));
        }
      },
      cfg.plant.growth.variant());

  out << "\n[gains]\n";
  num("G1", cfg.gains.G1);
  num("G2", cfg.gains.G2);
  num("epsilon", cfg.gains.epsilon);
  num("D_min", cfg.gains.D_min);
  num("D_max", cfg.gains.D_max);
  opt("s_min", cfg.s_min);

  out << "\n[sim]\n";
  num("dt", cfg.sim.dt);
  num("t_end", cfg.sim.t_end);
  num("delay_tau", cfg.sim.delay_tau);
  kv("sample_every", std::to_string(cfg.sim.sample_every));

  out << "\n[noise]\n";
  kv("kind", std::string(to_string(cfg.noise.kind)));
  num("omega", cfg.noise.omega);
  num("a", cfg.noise.a);
  kv("seed", std::to_string(cfg.noise.seed));

  out << "\n[scheme]\n";
  kv("type", std::string(to_string(cfg.scheme)));

  const DiscreteConfig& d = cfg.discrete;
  out << "\n[discrete]\n";
  num("v1", d.v1);
  num("v3", d.v3);
  num("tol", d.tol);
  num("h", d.h);
  num("t_inc_golden", d.t_inc_golden);
  num("t_inc_newton", d.t_inc_newton);
  kv("newton_steps", std::to_string(d.newton_steps));
  num("settle_ratio", d.settle_ratio);
  num("settle_floor", d.settle_floor);
  kv("min_windows", std::to_string(d.min_windows));
  kv("max_windows", std::to_string(d.max_windows));

  out << "\n[ic]\n";
  opt("s0", cfg.ic.s0);
  opt("b0", cfg.ic.b0);
  num("Dbar0", cfg.ic.Dbar0);
  opt("sbar0", cfg.ic.sbar0);

  out << "\n[output]\n";
  kv("trajectory", cfg.output.trajectory);
  kv("evaluations", cfg.output.evaluations);
  kv("summary", cfg.output.summary);

  out << "\n[report]\n";
  num("final_fraction", cfg.report.final_fraction);
  kv("oracle", cfg.report.oracle ? "true" : "false");
  num("reference_epsilon", cfg.report.reference_epsilon);
  num("oscillation_factor", cfg.report.oscillation_factor);
}

inline std::string emit(const ExperimentConfig& cfg) {
  std::ostringstream out;
  emit(out, cfg);
  return out.str();
}

}  // namespace chemostat_es
