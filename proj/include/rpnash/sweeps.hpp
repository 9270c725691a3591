#pragma once

// Convergence sweeps: as the RRA perturbation or the competition weights
// shrink, equilibria approach the CRRA closed form or the decoupled optimum.

#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "rpnash/equilibrium.hpp"
#include "rpnash/parallel.hpp"

namespace rpnash {

enum class SweepAxis { rra_perturbation, lambda };
enum class SweepReference { crra_closed_form, no_competition };

inline std::string_view axis_name(SweepAxis a) {
  return a == SweepAxis::rra_perturbation ? "rra_perturbation" : "lambda";
}
inline std::string_view reference_name(SweepReference r) {
  return r == SweepReference::crra_closed_form ? "crra_closed_form" : "no_competition";
}

struct SweepConfig {
  Game base_game;
  Market market;
  WealthVector x0;
  SweepAxis axis = SweepAxis::rra_perturbation;
  Vector grid;  // strictly decreasing, positive (a trailing 0 is allowed)
  SweepReference reference = SweepReference::crra_closed_form;
  SolveOptions solver{};
  int threads = 1;

  void validate() const {
    if (grid.empty()) throw InvalidConfiguration("sweep: grid must not be empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const bool last = i + 1 == grid.size();
      if (!(grid[i] > 0.0) && !(last && grid[i] == 0.0)) {
        throw InvalidConfiguration("sweep: grid values must be positive");
      }
      if (i > 0 && !(grid[i] < grid[i - 1])) {
        throw InvalidConfiguration("sweep: grid must be strictly decreasing");
      }
    }
    const bool consistent =
        (axis == SweepAxis::rra_perturbation && reference == SweepReference::crra_closed_form) ||
        (axis == SweepAxis::lambda && reference == SweepReference::no_competition);
    if (!consistent) {
      throw InvalidConfiguration(
          "sweep: axis and reference are inconsistent (rra_perturbation pairs with "
          "crra_closed_form, lambda with no_competition)");
    }
    if (x0.size() != base_game.size()) {
      throw InvalidConfiguration("sweep: x0 size does not match the number of agents");
    }
  }
};

struct SweepRow {
  double epsilon = 0.0;
  double sup_dist = std::numeric_limits<double>::quiet_NaN();
  double l1_dist = std::numeric_limits<double>::quiet_NaN();
  double l2_dist = std::numeric_limits<double>::quiet_NaN();
  int newton_iters = 0;
  double foc_residual = std::numeric_limits<double>::quiet_NaN();
  double budget_residual = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// Game at grid value `eps`: sine-perturbed agents with amplitude eps around
/// each base risk aversion, or every competition weight set to eps.
inline Game sweep_game(const SweepConfig& cfg, double eps) {
  std::vector<AgentSpec> agents;
  const int n = static_cast<int>(cfg.base_game.size());
  for (const AgentSpec& a : cfg.base_game.agents()) {
    if (cfg.axis == SweepAxis::rra_perturbation) {
      const Preference p = eps == 0.0
                               ? Preference::crra(a.pref().base_rra())
                               : Preference::sine_perturbed_crra(a.pref().base_rra(), eps);
      agents.emplace_back(p, a.lambda(), n);
    } else {
      agents.emplace_back(a.pref(), eps, n);
    }
  }
  return Game(std::move(agents));
}

inline EquilibriumProfile sweep_reference(const SweepConfig& cfg) {
  if (cfg.reference == SweepReference::crra_closed_form) {
    return crra_closed_form(sweep_game(cfg, 0.0), cfg.market, cfg.x0);
  }
  return no_competition_solve(without_competition(cfg.base_game), cfg.market, cfg.x0);
}

/// Largest over agents of E_P[|X - X_ref|^p]^{1/p}.
inline double lp_distance(const Market& m, const Matrix& a, const Matrix& b, double p) {
  double worst = 0.0;
  Vector diff(a.rows());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t k = 0; k < a.rows(); ++k) diff[k] = std::pow(std::abs(a(k, i) - b(k, i)), p);
    worst = std::max(worst, std::pow(m.expect_p(diff), 1.0 / p));
  }
  return worst;
}

/// One row per grid value, in grid order. Solver failures are recorded in
/// the row's status and do not stop the sweep.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const EquilibriumProfile ref = sweep_reference(cfg);
  std::vector<SweepRow> rows(cfg.grid.size());
  parallel_for(cfg.grid.size(), cfg.threads, [&](std::size_t r) {
    SweepRow& row = rows[r];
    row.epsilon = cfg.grid[r];
    try {
      const Game game = sweep_game(cfg, row.epsilon);
      const EquilibriumProfile prof = solve(game, cfg.market, cfg.x0, cfg.solver);
      row.sup_dist = sup_distance(prof.wealth, ref.wealth);
      row.l1_dist = lp_distance(cfg.market, prof.wealth, ref.wealth, 1.0);
      row.l2_dist = lp_distance(cfg.market, prof.wealth, ref.wealth, 2.0);
      row.newton_iters = prof.newton_iterations;
      row.foc_residual = prof.residuals.foc;
      row.budget_residual = prof.residuals.budget;
    } catch (const MaxIterationsExceeded&) {
      row.status = "max_iterations_exceeded";
    } catch (const SingularJacobian&) {
      row.status = "singular_jacobian";
    } catch (const VerificationFailed& e) {
      row.status = "verification_failed";
      row.foc_residual = e.profile().residuals.foc;
      row.budget_residual = e.profile().residuals.budget;
    } catch (const std::exception&) {
      row.status = "error";
    }
  });
  return rows;
}

/// Every distance column nonincreasing along the grid, up to `slack`.
inline bool distances_monotone(const std::vector<SweepRow>& rows, double slack = 1e-12) {
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (!(rows[r].sup_dist <= rows[r - 1].sup_dist + slack)) return false;
    if (!(rows[r].l1_dist <= rows[r - 1].l1_dist + slack)) return false;
    if (!(rows[r].l2_dist <= rows[r - 1].l2_dist + slack)) return false;
  }
  return true;
}

inline bool sup_distances_strictly_decreasing(const std::vector<SweepRow>& rows) {
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (!(rows[r].sup_dist < rows[r - 1].sup_dist)) return false;
  }
  return true;
}

}  // namespace rpnash
