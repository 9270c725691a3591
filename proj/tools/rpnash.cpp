// rpnash: solve, verify and cross-check relative-performance Nash equilibria.
//
// Exit codes
//   0  success
//   1  configuration, input or dimension error
//   2  solver failure (Newton did not converge or hit a singular Jacobian)
//   3  verification failure, or solver and oracle disagree
//   4  oracle inconclusive (best-response iteration did not converge)
//   5  sweep row failed or distances not monotone

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rpnash/equilibrium.hpp"
#include "rpnash/io/config.hpp"
#include "rpnash/io/csv.hpp"
#include "rpnash/oracle.hpp"
#include "rpnash/sweeps.hpp"

namespace {

using namespace rpnash;

enum Exit { kOk = 0, kInput = 1, kSolver = 2, kVerify = 3, kInconclusive = 4, kSweep = 5 };

struct Globals {
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> threads;
};

void apply_globals(const Globals& g, SolveOptions& o) {
  if (g.tol) o.newton.tol = *g.tol;
  if (g.max_iter) o.newton.max_iter = *g.max_iter;
  if (g.threads) o.newton.eval.threads = *g.threads;
}

void print_residuals(const Residuals& r) {
  std::printf("foc_residual    %s\nbudget_residual %s\n", io::fmt17(r.foc).c_str(),
              io::fmt17(r.budget).c_str());
}

void write_outputs(const io::RunConfig& cfg, const EquilibriumProfile& prof) {
  io::write_file(cfg.outputs.wealth, io::wealth_csv(cfg.market, prof.wealth));
  io::write_file(cfg.outputs.report, io::report_json(prof, cfg.outputs.wealth).dump(2) + "\n");
  if (!cfg.outputs.trace.empty()) io::write_file(cfg.outputs.trace, io::trace_csv(prof.trace));
}

double relative_sup(const Matrix& a, const Matrix& b) {
  double scale = 0.0;
  for (double v : b.data()) scale = std::max(scale, std::abs(v));
  return sup_distance(a, b) / std::max(scale, 1.0);
}

int cmd_solve(const std::string& path, const Globals& g) {
  io::RunConfig cfg = io::load_run_config(path);
  apply_globals(g, cfg.solver);
  EquilibriumProfile prof;
  try {
    prof = solve(cfg.game, cfg.market, cfg.x0, cfg.solver);
  } catch (const VerificationFailed& e) {
    write_outputs(cfg, e.profile());
    std::cerr << "error: " << e.what() << "\n";
    print_residuals(e.profile().residuals);
    return kVerify;
  } catch (const MaxIterationsExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (classify_regime(cfg.game, cfg.solver.thresholds) == Regime::unverified) {
      std::cerr << "note: outside the verified regimes either no equilibrium exists for these "
                   "initial wealths or the solver failed; the two cannot be told apart here\n";
    }
    return kSolver;
  } catch (const SingularJacobian& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
  write_outputs(cfg, prof);

  // Cross-check against the closed forms where they apply.
  std::optional<Matrix> reference;
  if (cfg.game.all_crra()) reference = crra_closed_form(cfg.game, cfg.market, cfg.x0).wealth;
  else if (cfg.game.no_competition())
    reference = no_competition_solve(cfg.game, cfg.market, cfg.x0).wealth;
  std::printf("regime          %s\n", std::string(regime_label(prof.regime)).c_str());
  std::printf("unique          %s\n", prof.unique() ? "yes" : "not asserted");
  std::printf("newton_iters    %d\n", prof.newton_iterations);
  print_residuals(prof.residuals);
  if (reference) {
    const double d = relative_sup(prof.wealth, *reference);
    std::printf("closed_form_gap %s\n", io::fmt17(d).c_str());
    if (d > 1e-8) {
      std::cerr << "error: solution differs from the closed form by " << d << "\n";
      return kVerify;
    }
  }
  return kOk;
}

int cmd_verify(const std::string& path, const std::string& wealth_path, const Globals& g) {
  const io::RunConfig cfg = io::load_run_config(path);
  const Matrix wealth = io::read_wealth_csv(wealth_path, cfg.market, cfg.game.size());
  const Residuals r = verify(cfg.game, cfg.market, cfg.x0, wealth);
  print_residuals(r);
  const double tol = g.tol.value_or(1e-8);
  if (r.foc <= tol && r.budget <= tol * cfg.x0.max()) {
    std::printf("verified\n");
    return kOk;
  }
  std::printf("not an equilibrium at tolerance %s\n", io::fmt17(tol).c_str());
  return kVerify;
}

int cmd_oracle(const std::string& path, const Globals& g, int max_rounds, double agree_tol) {
  io::RunConfig cfg = io::load_run_config(path);
  apply_globals(g, cfg.solver);

  std::optional<EquilibriumProfile> prof;
  std::string solver_error;
  try {
    prof = solve(cfg.game, cfg.market, cfg.x0, cfg.solver);
  } catch (const std::exception& e) {
    solver_error = e.what();
  }

  FixedPointResult fp;
  try {
    fp = fixed_point_iterate(cfg.game, cfg.market, cfg.x0,
                             decoupled_profile(cfg.game, cfg.market, cfg.x0), max_rounds);
  } catch (const std::exception& e) {
    std::cerr << "oracle: best-response iteration broke down: " << e.what() << "\n";
    fp.converged = false;
  }
  std::printf("oracle_rounds   %zu\n", fp.history.size());
  std::printf("oracle_status   %s\n", fp.converged ? "converged" : "not converged");

  if (!prof) {
    std::cerr << "error: " << solver_error << "\n";
    if (!fp.converged) {
      std::cerr << "inconclusive: neither the solver nor the oracle converged\n";
      return kInconclusive;
    }
    return kSolver;
  }
  if (!fp.converged) {
    std::cerr << "inconclusive: best-response iteration did not converge in " << max_rounds
              << " rounds\n";
    return kInconclusive;
  }
  const double d = sup_distance(prof->wealth, fp.profile);
  std::printf("sup_distance    %s\n", io::fmt17(d).c_str());
  if (d > agree_tol) {
    std::cerr << "error: solver and oracle disagree by " << d << "\n";
    return kVerify;
  }
  std::printf("agree\n");
  return kOk;
}

int cmd_sweep(const std::string& path, const Globals& g) {
  io::SweepFile f = io::load_sweep_config(path);
  apply_globals(g, f.sweep.solver);
  // Rows run in parallel; each solve stays serial.
  f.sweep.threads = f.sweep.solver.newton.eval.threads;
  f.sweep.solver.newton.eval.threads = 1;
  const std::vector<SweepRow> rows = run_sweep(f.sweep);
  io::write_file(f.output, io::sweep_csv(rows));
  std::printf("%-10s %-24s %-6s %s\n", "epsilon", "sup_dist", "iters", "status");
  bool all_ok = true;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string ratio;
    if (r > 0 && rows[r].ok() && rows[r - 1].ok() && rows[r].sup_dist > 0.0) {
      ratio = "  ratio " + io::fmt17(rows[r - 1].sup_dist / rows[r].sup_dist);
    }
    std::printf("%-10g %-24s %-6d %s%s\n", rows[r].epsilon, io::fmt17(rows[r].sup_dist).c_str(),
                rows[r].newton_iters, rows[r].status.c_str(), ratio.c_str());
    all_ok = all_ok && rows[r].ok();
  }
  if (!all_ok) {
    std::cerr << "error: at least one sweep row failed\n";
    return kSweep;
  }
  if (!distances_monotone(rows)) {
    std::cerr << "error: distances to the reference are not monotone along the grid\n";
    return kSweep;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative-performance Nash equilibria in complete markets"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  double tol = 0.0;
  int max_iter = 0;
  int threads = 1;
  app.add_option("--tol", tol, "Newton tolerance (solve, oracle, sweep); residual tolerance (verify)")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-iter", max_iter, "Newton iteration cap")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "worker threads for atom loops and sweep rows")
      ->check(CLI::PositiveNumber);

  std::string config, wealth;
  int max_rounds = 500;
  double agree_tol = 1e-6;

  auto* solve_cmd = app.add_subcommand("solve", "solve for the equilibrium of a run config");
  solve_cmd->add_option("config", config, "run config")->required();

  auto* verify_cmd = app.add_subcommand("verify", "check a wealth profile against a run config");
  verify_cmd->add_option("config", config, "run config")->required();
  verify_cmd->add_option("wealth", wealth, "wealth CSV (atom,p,z,X1..XN)")->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "cross-check solve against best responses");
  oracle_cmd->add_option("config", config, "run config")->required();
  oracle_cmd->add_option("--max-rounds", max_rounds, "best-response rounds")
      ->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--agree-tol", agree_tol, "allowed sup-norm disagreement")
      ->check(CLI::PositiveNumber);

  auto* sweep_cmd = app.add_subcommand("sweep", "run a convergence sweep");
  sweep_cmd->add_option("config", config, "sweep config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }
  if (app.count("--tol") > 0) g.tol = tol;
  if (app.count("--max-iter") > 0) g.max_iter = max_iter;
  if (app.count("--threads") > 0) g.threads = threads;

  try {
    if (*solve_cmd) return cmd_solve(config, g);
    if (*verify_cmd) return cmd_verify(config, wealth, g);
    if (*oracle_cmd) return cmd_oracle(config, g, max_rounds, agree_tol);
    if (*sweep_cmd) return cmd_sweep(config, g);
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
  return kInput;
}
