#pragma once

// Run and sweep configuration files (TOML subset, or JSON by extension).
//
//   [market]   kind = "lognormal", theta, horizon, nodes   | kind = "csv", path
//   [solver]   tol, max_iter, threads
//   [regime]   rra_spread, lambda
//   [outputs]  report, wealth, trace
//   [[agents]] family, r | r_mean, amplitude | delta, lambda, x0, rra_hi
//   [sweep]    axis, reference, grid, output

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpnash/equilibrium.hpp"
#include "rpnash/io/csv.hpp"
#include "rpnash/io/toml.hpp"
#include "rpnash/sweeps.hpp"

namespace rpnash::io {

using nlohmann::json;

/// A config value is missing, has the wrong type or violates an invariant.
/// The message starts with the offending field.
class ConfigError : public InvalidConfiguration {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : InvalidConfiguration(field + ": " + msg) {}
};

struct Outputs {
  std::string report = "report.json";
  std::string wealth = "wealth.csv";
  std::string trace;  // empty: not written
};

struct RunConfig {
  Market market;
  Game game;
  WealthVector x0;
  SolveOptions solver;
  Outputs outputs;
};

struct SweepFile {
  SweepConfig sweep;
  std::string output;
};

namespace detail {

inline const json& require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(path + key, "missing");
  return obj.at(key);
}

inline double number(const json& v, const std::string& field) {
  if (v.is_string() && (v == "inf" || v == "+inf")) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw ConfigError(field, "must be a number");
  return v.get<double>();
}

inline double number_or(const json& obj, const std::string& path, const std::string& key,
                        double fallback) {
  return obj.contains(key) ? number(obj.at(key), path + key) : fallback;
}

inline std::string string_of(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "must be a string");
  return v.get<std::string>();
}

inline int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field, "must be an integer");
  return v.get<int>();
}

inline Market parse_market(const json& root) {
  const json& m = require(root, "", "market");
  const std::string kind = string_of(require(m, "market.", "kind"), "market.kind");
  try {
    if (kind == "lognormal") {
      return lognormal_market(number(require(m, "market.", "theta"), "market.theta"),
                              number(require(m, "market.", "horizon"), "market.horizon"),
                              integer(require(m, "market.", "nodes"), "market.nodes"));
    }
    if (kind == "csv") return read_market_csv(string_of(require(m, "market.", "path"), "market.path"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("market", e.what());
  }
  throw ConfigError("market.kind", "must be \"lognormal\" or \"csv\", got \"" + kind + "\"");
}

inline Preference parse_preference(const json& a, const std::string& path) {
  const std::string family = string_of(require(a, path, "family"), path + "family");
  Preference pref = Preference::crra(1.0);
  try {
    if (family == "crra") {
      pref = Preference::crra(number(require(a, path, "r"), path + "r"));
    } else if (family == "sine_perturbed_crra") {
      pref = Preference::sine_perturbed_crra(number(require(a, path, "r"), path + "r"),
                                             number(require(a, path, "amplitude"), path + "amplitude"));
    } else if (family == "tanh_blend_crra") {
      pref = Preference::tanh_blend_crra(number(require(a, path, "r_mean"), path + "r_mean"),
                                         number(require(a, path, "delta"), path + "delta"));
    } else {
      throw ConfigError(path + "family", "must be crra, sine_perturbed_crra or tanh_blend_crra");
    }
    if (a.contains("rra_hi")) {
      pref = pref.with_declared_rra_hi(number(a.at("rra_hi"), path + "rra_hi"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path.substr(0, path.size() - 1), e.what());
  }
  return pref;
}

struct ParsedAgents {
  Game game;
  WealthVector x0;
};

inline ParsedAgents parse_agents(const json& root, bool lambda_required = true) {
  const json& list = require(root, "", "agents");
  if (!list.is_array() || list.empty()) throw ConfigError("agents", "must be a non-empty list");
  const int n = static_cast<int>(list.size());
  std::vector<AgentSpec> agents;
  Vector x0;
  for (int i = 0; i < n; ++i) {
    const std::string path = "agents[" + std::to_string(i) + "].";
    const json& a = list[i];
    const Preference pref = parse_preference(a, path);
    const double lambda = lambda_required ? number(require(a, path, "lambda"), path + "lambda")
                                          : number_or(a, path, "lambda", 0.0);
    x0.push_back(number_or(a, path, "x0", 1.0));
    if (!(x0.back() > 0.0) || !std::isfinite(x0.back())) {
      throw ConfigError(path + "x0", "initial wealth must be positive and finite");
    }
    try {
      agents.emplace_back(pref, lambda, n);
    } catch (const std::exception& e) {
      throw ConfigError(path.substr(0, path.size() - 1), e.what());
    }
  }
  try {
    return {Game(std::move(agents)), WealthVector(std::move(x0))};
  } catch (const std::exception& e) {
    throw ConfigError("agents", e.what());
  }
}

inline SolveOptions parse_solver(const json& root) {
  SolveOptions o;
  if (root.contains("solver")) {
    const json& s = root.at("solver");
    o.newton.tol = number_or(s, "solver.", "tol", o.newton.tol);
    if (!(o.newton.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
    if (s.contains("max_iter")) o.newton.max_iter = integer(s.at("max_iter"), "solver.max_iter");
    if (o.newton.max_iter < 0) throw ConfigError("solver.max_iter", "must be >= 0");
    if (s.contains("threads")) o.newton.eval.threads = integer(s.at("threads"), "solver.threads");
  }
  if (root.contains("regime")) {
    const json& r = root.at("regime");
    o.thresholds.rra_spread = number_or(r, "regime.", "rra_spread", o.thresholds.rra_spread);
    o.thresholds.lambda = number_or(r, "regime.", "lambda", o.thresholds.lambda);
  }
  return o;
}

}  // namespace detail

/// Parses TOML unless the path ends in ".json".
inline json load_config_document(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  try {
    return parse_toml(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline RunConfig parse_run_config(const json& root) {
  Market market = detail::parse_market(root);
  detail::ParsedAgents agents = detail::parse_agents(root);
  Outputs out;
  if (root.contains("outputs")) {
    const json& o = root.at("outputs");
    if (o.contains("report")) out.report = detail::string_of(o.at("report"), "outputs.report");
    if (o.contains("wealth")) out.wealth = detail::string_of(o.at("wealth"), "outputs.wealth");
    if (o.contains("trace")) out.trace = detail::string_of(o.at("trace"), "outputs.trace");
  }
  return {std::move(market), std::move(agents.game), std::move(agents.x0),
          detail::parse_solver(root), std::move(out)};
}

/// Input files named in a config (market.path) are taken relative to the
/// config's directory. Output paths stay relative to the working directory.
inline json resolve_inputs(json root, const std::string& config_path) {
  if (root.is_object() && root.contains("market") && root["market"].is_object() &&
      root["market"].contains("path") && root["market"]["path"].is_string()) {
    const std::filesystem::path p = root["market"]["path"].get<std::string>();
    if (p.is_relative()) {
      root["market"]["path"] = (std::filesystem::path(config_path).parent_path() / p).string();
    }
  }
  return root;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(resolve_inputs(load_config_document(path), path));
}

/// For axis "lambda" the agents' own lambda entries are optional and ignored.
inline SweepFile parse_sweep_config(const json& root) {
  const json& s = detail::require(root, "", "sweep");
  const std::string axis = detail::string_of(detail::require(s, "sweep.", "axis"), "sweep.axis");
  const std::string ref =
      detail::string_of(detail::require(s, "sweep.", "reference"), "sweep.reference");
  SweepAxis ax;
  if (axis == "rra_perturbation") ax = SweepAxis::rra_perturbation;
  else if (axis == "lambda") ax = SweepAxis::lambda;
  else throw ConfigError("sweep.axis", "must be rra_perturbation or lambda");
  SweepReference rf;
  if (ref == "crra_closed_form") rf = SweepReference::crra_closed_form;
  else if (ref == "no_competition") rf = SweepReference::no_competition;
  else throw ConfigError("sweep.reference", "must be crra_closed_form or no_competition");

  const json& g = detail::require(s, "sweep.", "grid");
  if (!g.is_array()) throw ConfigError("sweep.grid", "must be a list of numbers");
  Vector grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    grid.push_back(detail::number(g[i], "sweep.grid[" + std::to_string(i) + "]"));
  }
  std::string output = "sweep.csv";
  if (s.contains("output")) output = detail::string_of(s.at("output"), "sweep.output");

  Market market = detail::parse_market(root);
  detail::ParsedAgents agents = detail::parse_agents(root, ax != SweepAxis::lambda);
  SweepFile f{SweepConfig{std::move(agents.game), std::move(market), std::move(agents.x0), ax,
                          std::move(grid), rf, detail::parse_solver(root), 1},
              std::move(output)};
  try {
    f.sweep.validate();
  } catch (const std::exception& e) {
    throw ConfigError("sweep", e.what());
  }
  return f;
}

inline SweepFile load_sweep_config(const std::string& path) {
  return parse_sweep_config(resolve_inputs(load_config_document(path), path));
}

/// JSON run report. `wealth_path` is stored as a reference, not inlined.
inline json report_json(const EquilibriumProfile& prof, const std::string& wealth_path) {
  json r;
  r["regime_label"] = std::string(regime_label(prof.regime));
  r["unique"] = prof.unique();
  r["dual"] = prof.dual.d;
  r["budgets"] = prof.budgets;
  r["residuals"] = {{"foc", prof.residuals.foc}, {"budget", prof.residuals.budget}};
  r["newton_iterations"] = prof.newton_iterations;
  r["wealth_csv"] = wealth_path;
  return r;
}

}  // namespace rpnash::io
