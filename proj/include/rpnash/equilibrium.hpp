#pragma once

// Equilibrium solve/verify and the two closed-form special cases.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rpnash/gmap.hpp"
#include "rpnash/hmap.hpp"
#include "rpnash/market.hpp"

namespace rpnash {

enum class Regime { crra_closed_form, no_competition, close_to_crra, small_lambda, unverified };

/// Report labels. The two perturbative regimes are named after the
/// convergence results they rely on.
inline std::string_view regime_label(Regime r) {
  switch (r) {
    case Regime::crra_closed_form: return "crra-closed-form";
    case Regime::no_competition: return "no-competition";
    case Regime::close_to_crra: return "prop-4.2";
    case Regime::small_lambda: return "prop-4.3";
    case Regime::unverified: return "unverified-regime";
  }
  return "unverified-regime";
}

/// Engineering thresholds for labelling a game as perturbative. They are not
/// certificates: the underlying results only hold for "small enough" values.
struct RegimeThresholds {
  double rra_spread = 0.25;  // max_i (rra_hi - rra_lo)
  double lambda = 0.1;       // max_i lambda_i, with every rra_hi finite
};

inline Regime classify_regime(const Game& game, const RegimeThresholds& th = {}) {
  if (game.all_crra()) return Regime::crra_closed_form;
  if (game.no_competition()) return Regime::no_competition;
  double spread = 0.0, lambda = 0.0;
  bool bounded = true;
  for (const AgentSpec& a : game.agents()) {
    spread = std::max(spread, a.pref().rra_hi() - a.pref().rra_lo());
    lambda = std::max(lambda, a.lambda());
    bounded = bounded && std::isfinite(a.pref().rra_hi());
  }
  if (spread <= th.rra_spread) return Regime::close_to_crra;
  if (bounded && lambda <= th.lambda) return Regime::small_lambda;
  return Regime::unverified;
}

struct Residuals {
  double foc = 0.0;
  double budget = 0.0;
};

struct EquilibriumProfile {
  Matrix wealth;  // K x N, strictly positive
  DualVector dual;
  Vector budgets;  // E_Q[X^i]
  Residuals residuals;
  Regime regime = Regime::unverified;
  int newton_iterations = 0;
  std::vector<NewtonTraceRow> trace;

  bool unique() const { return regime != Regime::unverified; }
};

class VerificationFailed : public std::runtime_error {
 public:
  VerificationFailed(const std::string& what, EquilibriumProfile profile)
      : std::runtime_error(what), profile_(std::move(profile)) {}
  const EquilibriumProfile& profile() const { return profile_; }

 private:
  EquilibriumProfile profile_;
};

namespace detail {

inline void check_profile_shape(const Game& game, const Market& m, const Matrix& wealth) {
  if (wealth.rows() != m.atom_count() || wealth.cols() != game.size()) {
    std::ostringstream os;
    os << "profile is " << wealth.rows() << "x" << wealth.cols() << ", expected "
       << m.atom_count() << "x" << game.size();
    throw std::invalid_argument(os.str());
  }
}

inline Vector budgets_of(const Market& m, const Matrix& wealth) {
  Vector b(wealth.cols());
  for (std::size_t i = 0; i < wealth.cols(); ++i) b[i] = m.expect_q(wealth.column(i));
  return b;
}

}  // namespace detail

struct VerifyDetail {
  Residuals residuals;
  Vector dual;  // Q-weighted mean of G(ln X) - ln Z per agent
};

/// First-order-condition and budget residuals of a candidate profile.
///
/// At an equilibrium, G(ln X_k) - ln z_k is the same vector D for every atom
/// k. The FOC residual is the largest deviation from its Q-weighted mean; the
/// budget residual is max_i |E_Q[X^i] - x0_i|.
inline VerifyDetail verify_detailed(const Game& game, const Market& m, const WealthVector& x0,
                                    const Matrix& wealth) {
  detail::check_profile_shape(game, m, wealth);
  if (x0.size() != game.size()) throw std::invalid_argument("verify: wealth vector size mismatch");
  const std::size_t atoms = m.atom_count(), n = game.size();
  Matrix gap(atoms, n);
  Vector logx(n);
  for (std::size_t k = 0; k < atoms; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = wealth(k, i);
      if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("verify: profile entries must be positive and finite");
      }
      logx[i] = std::log(x);
    }
    const Vector g = g_apply(game, logx);
    for (std::size_t i = 0; i < n; ++i) gap(k, i) = g[i] - m.log_z()[k];
  }
  VerifyDetail out;
  out.dual.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector col = gap.column(i);
    out.dual[i] = m.expect_q(col);
    for (std::size_t k = 0; k < atoms; ++k) {
      out.residuals.foc = std::max(out.residuals.foc, std::abs(col[k] - out.dual[i]));
    }
  }
  const Vector b = detail::budgets_of(m, wealth);
  for (std::size_t i = 0; i < n; ++i) {
    out.residuals.budget = std::max(out.residuals.budget, std::abs(b[i] - x0.x0()[i]));
  }
  return out;
}

inline Residuals verify(const Game& game, const Market& m, const WealthVector& x0,
                        const Matrix& wealth) {
  return verify_detailed(game, m, x0, wealth).residuals;
}

struct SolveOptions {
  NewtonOptions newton{};
  RegimeThresholds thresholds{};
  double foc_tol = 1e-8;
  double budget_tol = 1e-8;  // relative to max(x0)
};

/// Solves h(D) = ln x0 and returns H(D) with residual diagnostics. Throws
/// VerificationFailed if either residual exceeds its tolerance.
inline EquilibriumProfile solve(const Game& game, const Market& m, const WealthVector& x0,
                                const SolveOptions& opts = {}) {
  if (x0.size() != game.size()) throw std::invalid_argument("solve: wealth vector size mismatch");
  NewtonResult nr = h_invert(game, m, x0.log_x0(), opts.newton);
  EquilibriumProfile prof;
  prof.wealth = h_cal(game, m, nr.dual, opts.newton.eval);
  prof.dual = nr.dual;
  prof.budgets = detail::budgets_of(m, prof.wealth);
  prof.residuals = verify(game, m, x0, prof.wealth);
  prof.regime = classify_regime(game, opts.thresholds);
  prof.newton_iterations = nr.iterations;
  prof.trace = std::move(nr.trace);
  if (prof.residuals.foc > opts.foc_tol || prof.residuals.budget > opts.budget_tol * x0.max()) {
    std::ostringstream os;
    os << "solve: verification failed (foc residual " << prof.residuals.foc
       << ", budget residual " << prof.residuals.budget << ")";
    throw VerificationFailed(os.str(), std::move(prof));
  }
  return prof;
}

/// Closed form for CRRA agents: A = J_c^{-1} 1 and
/// X^i = x0_i z^{A_i} / E_Q[z^{A_i}].
inline EquilibriumProfile crra_closed_form(const Game& game, const Market& m,
                                           const WealthVector& x0) {
  if (!game.all_crra()) throw std::invalid_argument("crra_closed_form: every agent must be CRRA");
  if (x0.size() != game.size()) throw std::invalid_argument("crra_closed_form: size mismatch");
  const CrraTangent t = crra_tangent(game, m);
  const std::size_t atoms = m.atom_count(), n = game.size();
  EquilibriumProfile prof;
  prof.wealth = Matrix(atoms, n);
  prof.dual.d.resize(n);
  Vector shifted(n);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = x0.log_x0()[i] - t.h0[i];
  prof.dual.d = t.jc * shifted;
  for (std::size_t k = 0; k < atoms; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      prof.wealth(k, i) = std::exp(shifted[i] + t.exponents[i] * m.log_z()[k]);
    }
  prof.budgets = detail::budgets_of(m, prof.wealth);
  prof.residuals = verify(game, m, x0, prof.wealth);
  prof.regime = Regime::crra_closed_form;
  return prof;
}

/// Optimal terminal wealth of one agent with no competition: I(y z) with
/// y > 0 fixed by E_Q[I(y z)] = x0, found by monotone root-finding in ln y.
/// Returns the per-atom wealth and y.
inline std::pair<Vector, double> decoupled_optimum(const Preference& pref, const Market& m,
                                                   double x0) {
  const std::size_t atoms = m.atom_count();
  const auto log_z = m.log_z();
  Vector logx(atoms), slope(atoms), weighted(atoms);
  const double target = std::log(x0);
  auto eval = [&](double eta) {
    for (std::size_t k = 0; k < atoms; ++k) {
      logx[k] = pref.v_inv(eta + log_z[k]);
      slope[k] = 1.0 / pref.v_prime(logx[k]);
    }
    const double f = m.log_expect_q_exp(logx);
    for (std::size_t k = 0; k < atoms; ++k) {
      weighted[k] = std::exp(std::log(m.p()[k]) + log_z[k] + logx[k] - f) * slope[k];
    }
    return std::pair{f, compensated_sum(weighted)};
  };
  // d/d eta ln E_Q[I(e^eta z)] lies in [-1/rra_lo, -1/rra_hi].
  const double f0 = eval(0.0).first;
  const double rate = std::isfinite(pref.rra_hi()) ? pref.rra_hi() : pref.rra_lo();
  const double root =
      solve_decreasing(eval, target, 0.0, std::abs(f0 - target) * rate, 1.0 + std::abs(target))
          .x;
  Vector x(atoms);
  for (std::size_t k = 0; k < atoms; ++k) x[k] = std::exp(pref.v_inv(root + log_z[k]));
  return {std::move(x), std::exp(root)};
}

/// The game with every lambda = 0 splits into N single-agent problems.
inline EquilibriumProfile no_competition_solve(const Game& game, const Market& m,
                                               const WealthVector& x0) {
  if (!game.no_competition()) {
    throw std::invalid_argument("no_competition_solve: every lambda must be 0");
  }
  if (x0.size() != game.size()) throw std::invalid_argument("no_competition_solve: size mismatch");
  const std::size_t atoms = m.atom_count(), n = game.size();
  EquilibriumProfile prof;
  prof.wealth = Matrix(atoms, n);
  prof.dual.d.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [x, y] = decoupled_optimum(game.agent(i).pref(), m, x0.x0()[i]);
    for (std::size_t k = 0; k < atoms; ++k) prof.wealth(k, i) = x[k];
    prof.dual.d[i] = std::log(y);
  }
  prof.budgets = detail::budgets_of(m, prof.wealth);
  prof.residuals = verify(game, m, x0, prof.wealth);
  prof.regime = Regime::no_competition;
  return prof;
}

/// Same agents with every competition weight set to 0.
inline Game without_competition(const Game& game) {
  std::vector<AgentSpec> agents;
  const int n = static_cast<int>(game.size());
  for (const AgentSpec& a : game.agents()) agents.emplace_back(a.pref(), 0.0, n);
  return Game(std::move(agents));
}

/// Sup-norm distance between two wealth matrices of the same shape.
inline double sup_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("sup_distance: shape mismatch");
  }
  double d = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    d = std::max(d, std::abs(a.data()[k] - b.data()[k]));
  }
  return d;
}

}  // namespace rpnash
