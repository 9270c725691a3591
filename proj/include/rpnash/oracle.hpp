#pragma once

// Independent check on equilibria: single-agent utility maximization against
// a numeraire via complete-market duality, and Gauss-Seidel best-response
// iteration built on it.
//
// Nothing here goes through G^{-1} or h; agreement with `solve` is evidence
// that both are right.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rpnash/equilibrium.hpp"
#include "rpnash/gmap.hpp"
#include "rpnash/market.hpp"
#include "rpnash/preferences.hpp"
#include "rpnash/roots.hpp"

namespace rpnash {

/// Positive random variable L used to denominate wealth inside U.
class Numeraire {
 public:
  explicit Numeraire(Vector l) : l_(std::move(l)) {
    for (double v : l_) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("Numeraire: entries must be positive and finite");
      }
    }
  }
  static Numeraire constant(std::size_t atoms, double c = 1.0) {
    return Numeraire(Vector(atoms, c));
  }
  std::span<const double> values() const { return l_; }
  std::size_t size() const { return l_.size(); }

 private:
  Vector l_;
};

struct SingleAgentResult {
  Vector g;        // optimal terminal wealth per atom
  double y = 0.0;  // dual multiplier, U'(g/L) = y L Z
};

/// Maximizes E[U(g / L)] over E_Q[g] <= x. The optimizer is
/// g = L I(y L Z) with y the root of the budget equation, solved in ln y.
inline SingleAgentResult single_agent_solve(const Preference& pref, const Market& m,
                                            const Numeraire& l, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("single_agent_solve: budget must be positive");
  if (l.size() != m.atom_count()) {
    throw std::invalid_argument("single_agent_solve: numeraire size does not match market");
  }
  const std::size_t atoms = m.atom_count();
  const auto log_z = m.log_z();
  Vector log_l(atoms), log_g(atoms), inner_slope(atoms), terms(atoms);
  for (std::size_t k = 0; k < atoms; ++k) log_l[k] = std::log(l.values()[k]);

  // F(eta) = ln E_Q[L I(e^eta L Z)], strictly decreasing in eta.
  auto eval = [&](double eta) {
    for (std::size_t k = 0; k < atoms; ++k) {
      const double u = pref.v_inv(eta + log_l[k] + log_z[k]);
      log_g[k] = log_l[k] + u;
      inner_slope[k] = 1.0 / pref.v_prime(u);
    }
    const double f = m.log_expect_q_exp(log_g);
    for (std::size_t k = 0; k < atoms; ++k) {
      terms[k] = std::exp(std::log(m.p()[k]) + log_z[k] + log_g[k] - f) * inner_slope[k];
    }
    return std::pair{f, compensated_sum(terms)};
  };
  const double target = std::log(x);
  const double f0 = eval(0.0).first;
  const double rate = std::isfinite(pref.rra_hi()) ? pref.rra_hi() : pref.rra_lo();
  const ScalarRoot root = solve_decreasing(eval, target, 0.0, std::abs(f0 - target) * rate,
                                           1.0 + std::abs(target));
  SingleAgentResult out;
  out.y = std::exp(root.x);
  out.g.resize(atoms);
  for (std::size_t k = 0; k < atoms; ++k) {
    out.g[k] = std::exp(log_l[k] + pref.v_inv(root.x + log_l[k] + log_z[k]));
  }
  return out;
}

/// E[U(g / L)] with U normalized by U(1) = 0.
inline double expected_utility(const Preference& pref, const Market& m, std::span<const double> g,
                               const Numeraire& l) {
  Vector u(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) u[k] = pref.utility(g[k] / l.values()[k]);
  return m.expect_p(u);
}

/// L_i = (prod_{j != i} X^j)^{mu_i} per atom.
inline Numeraire competition_numeraire(const Game& game, const Matrix& profile, std::size_t i) {
  Vector l(profile.rows());
  const double mu = game.agent(i).mu();
  for (std::size_t k = 0; k < profile.rows(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < profile.cols(); ++j)
      if (j != i) s += std::log(profile(k, j));
    l[k] = std::exp(mu * s);
  }
  return Numeraire(std::move(l));
}

/// Agent i's optimal terminal wealth when the others' wealths are fixed.
inline Vector best_response(const Game& game, const Market& m, const WealthVector& x0,
                            const Matrix& profile, std::size_t i) {
  detail::check_profile_shape(game, m, profile);
  if (i >= game.size()) throw std::out_of_range("best_response: agent index out of range");
  for (double v : profile.data()) {
    if (!(v > 0.0)) throw std::invalid_argument("best_response: profile must be positive");
  }
  return single_agent_solve(game.agent(i).pref(), m, competition_numeraire(game, profile, i),
                            x0.x0()[i])
      .g;
}

struct FixedPointResult {
  Matrix profile;
  bool converged = false;
  Vector history;  // sup-norm change per round
};

/// Gauss-Seidel best-response rounds over agents 0..N-1 until the sup-norm
/// change of a full round is at most `change_tol`, or `max_rounds` is hit.
inline FixedPointResult fixed_point_iterate(const Game& game, const Market& m,
                                            const WealthVector& x0, const Matrix& start,
                                            int max_rounds, double change_tol = 1e-9) {
  detail::check_profile_shape(game, m, start);
  FixedPointResult out;
  out.profile = start;
  for (int round = 0; round < max_rounds; ++round) {
    double change = 0.0;
    for (std::size_t i = 0; i < game.size(); ++i) {
      const Vector next = best_response(game, m, x0, out.profile, i);
      for (std::size_t k = 0; k < next.size(); ++k) {
        change = std::max(change, std::abs(next[k] - out.profile(k, i)));
        out.profile(k, i) = next[k];
      }
    }
    out.history.push_back(change);
    if (!std::isfinite(change)) break;
    if (change <= change_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

/// Profile in which every agent ignores the others (L = 1).
inline Matrix decoupled_profile(const Game& game, const Market& m, const WealthVector& x0) {
  Matrix prof(m.atom_count(), game.size());
  for (std::size_t i = 0; i < game.size(); ++i) {
    const Vector g = single_agent_solve(game.agent(i).pref(), m,
                                        Numeraire::constant(m.atom_count()), x0.x0()[i])
                         .g;
    for (std::size_t k = 0; k < g.size(); ++k) prof(k, i) = g[k];
  }
  return prof;
}

}  // namespace rpnash
