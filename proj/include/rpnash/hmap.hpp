#pragma once

// Dual-to-wealth map.
//
//   H(D) = exp G^{-1}(D + ln Z 1)      (one row per atom)
//   h(D) = ln E_Q[H(D)]
//
// A dual vector D produces an equilibrium for initial wealths exp h(D), so
// equilibria for given wealths x0 are found by solving h(D) = ln x0.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpnash/gmap.hpp"
#include "rpnash/linalg.hpp"
#include "rpnash/market.hpp"
#include "rpnash/parallel.hpp"

namespace rpnash {

/// D = ln C, the logarithms of the dual constants.
struct DualVector {
  Vector d;

  std::size_t size() const { return d.size(); }
  friend bool operator==(const DualVector&, const DualVector&) = default;
};

/// Initial wealths x0 > 0 with cached logarithms.
class WealthVector {
 public:
  explicit WealthVector(Vector x0) : x0_(std::move(x0)), log_x0_(x0_.size()) {
    if (x0_.empty()) throw InvalidConfiguration("wealth: at least one entry is required");
    for (std::size_t i = 0; i < x0_.size(); ++i) {
      if (!(x0_[i] > 0.0) || !std::isfinite(x0_[i])) {
        throw InvalidConfiguration("wealth: x0[" + std::to_string(i) + "] must be positive");
      }
      log_x0_[i] = std::log(x0_[i]);
    }
  }

  std::size_t size() const { return x0_.size(); }
  std::span<const double> x0() const { return x0_; }
  std::span<const double> log_x0() const { return log_x0_; }
  double max() const { return inf_norm(x0_); }

 private:
  Vector x0_;
  Vector log_x0_;
};

struct EvalOptions {
  int threads = 1;
};

/// Everything the Newton solver needs at one dual vector.
struct HEvaluation {
  Matrix log_wealth;   // K x N, row k = G^{-1}(D + ln z_k 1)
  Vector h;            // ln E_Q[H^i]
  Matrix weights;      // K x N, q_{k,i} = p_k z_k H_{k,i} / E_Q[H^i]
  Matrix jacobian;     // N x N, empty unless requested
};

namespace detail {

inline void check_game_dual(const Game& game, std::span<const double> d) {
  if (d.size() != game.size()) {
    throw std::invalid_argument("dual vector has " + std::to_string(d.size()) +
                                " entries, game has " + std::to_string(game.size()) + " agents");
  }
}

}  // namespace detail

/// Evaluates ln H, h, the Q-weights of H and optionally Jh at `d`.
///
/// The Jacobian entry (i, j) is the H^i-weighted Q-average over atoms of
/// [J G^{-1}]_{ij} at D + ln z_k 1. Atoms are evaluated independently (in
/// parallel when requested) and reduced in atom order.
inline HEvaluation h_evaluate(const Game& game, const Market& m, std::span<const double> d,
                              bool with_jacobian, const EvalOptions& opts = {}) {
  detail::check_game_dual(game, d);
  const std::size_t n = game.size();
  const std::size_t atoms = m.atom_count();
  HEvaluation out;
  out.log_wealth = Matrix(atoms, n);
  std::vector<Matrix> inv_jac(with_jacobian ? atoms : 0);
  const auto log_z = m.log_z();

  parallel_for(atoms, opts.threads, [&](std::size_t k) {
    Vector point(d.begin(), d.end());
    for (double& v : point) v += log_z[k];
    const Vector y = g_invert(game, point);
    std::copy(y.begin(), y.end(), out.log_wealth.row(k).begin());
    if (with_jacobian) inv_jac[k] = g_inverse_jacobian_at(game, y);
  });

  out.h.resize(n);
  out.weights = Matrix(atoms, n);
  Vector column(atoms), logw(atoms);
  const auto p = m.p();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < atoms; ++k) {
      logw[k] = std::log(p[k]) + log_z[k] + out.log_wealth(k, i);
    }
    const double lse = log_sum_exp(logw);
    out.h[i] = lse;
    for (std::size_t k = 0; k < atoms; ++k) out.weights(k, i) = std::exp(logw[k] - lse);
  }

  if (with_jacobian) {
    out.jacobian = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < atoms; ++k) column[k] = out.weights(k, i) * inv_jac[k](i, j);
        out.jacobian(i, j) = compensated_sum(column);
      }
  }
  return out;
}

/// K x N matrix with row k = exp G^{-1}(D + ln z_k 1).
inline Matrix h_cal(const Game& game, const Market& m, const DualVector& d,
                    const EvalOptions& opts = {}) {
  Matrix wealth = h_evaluate(game, m, d.d, false, opts).log_wealth;
  for (std::size_t k = 0; k < wealth.rows(); ++k)
    for (double& v : wealth.row(k)) v = std::exp(v);
  return wealth;
}

inline Vector h_apply(const Game& game, const Market& m, const DualVector& d,
                      const EvalOptions& opts = {}) {
  return h_evaluate(game, m, d.d, false, opts).h;
}

inline Matrix h_jacobian(const Game& game, const Market& m, const DualVector& d,
                         const EvalOptions& opts = {}) {
  return h_evaluate(game, m, d.d, true, opts).jacobian;
}

/// CRRA tangent at the origin: r_i = -V_i'(0), J_c, A = J_c^{-1} 1 and
/// h_c(0)_i = ln E_Q[z^{A_i}].
struct CrraTangent {
  Vector r;
  Matrix jc;
  Vector exponents;
  Vector h0;
};

inline CrraTangent crra_tangent(const Game& game, const Market& m) {
  CrraTangent t;
  t.r.resize(game.size());
  for (std::size_t i = 0; i < game.size(); ++i) t.r[i] = -game.agent(i).pref().v_prime(0.0);
  t.jc = crra_jacobian(game, t.r);
  const Vector ones(game.size(), 1.0);
  t.exponents = solve_linear(t.jc, ones);
  t.h0.resize(game.size());
  Vector a(m.atom_count());
  for (std::size_t i = 0; i < game.size(); ++i) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = t.exponents[i] * m.log_z()[k];
    t.h0[i] = m.log_expect_q_exp(a);
  }
  return t;
}

/// Initial guess d0 = J_c (target - h_c(0)), exact for CRRA games.
inline DualVector crra_initial_guess(const Game& game, const Market& m,
                                     std::span<const double> target) {
  const CrraTangent t = crra_tangent(game, m);
  Vector rhs(target.begin(), target.end());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= t.h0[i];
  return {t.jc * rhs};
}

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 60;
  int max_backtracks = 40;
  double armijo = 1e-4;
  EvalOptions eval{};
};

struct NewtonTraceRow {
  int iteration;
  double residual;
  double step;
};

struct NewtonResult {
  DualVector dual;
  double residual = 0.0;
  int iterations = 0;
  std::vector<NewtonTraceRow> trace;
};

/// The damped Newton iteration for h(D) = target ran out of iterations or
/// backtracks. Carries the best iterate found.
class MaxIterationsExceeded : public std::runtime_error {
 public:
  MaxIterationsExceeded(const std::string& what, NewtonResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const NewtonResult& best() const { return best_; }

 private:
  NewtonResult best_;
};

class SingularJacobian : public std::runtime_error {
 public:
  SingularJacobian(const std::string& what, NewtonResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const NewtonResult& best() const { return best_; }

 private:
  NewtonResult best_;
};

/// Solves h(D) = target by Newton's method with backtracking on the
/// infinity-norm residual, starting from the CRRA tangent guess unless
/// `start` is given.
inline NewtonResult h_invert(const Game& game, const Market& m, std::span<const double> target,
                             const NewtonOptions& opts = {},
                             const DualVector* start = nullptr) {
  detail::check_game_dual(game, target);
  NewtonResult res;
  res.dual = start ? *start : crra_initial_guess(game, m, target);

  auto residual_of = [&](const HEvaluation& e) {
    Vector r(e.h);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= target[i];
    return r;
  };

  HEvaluation ev = h_evaluate(game, m, res.dual.d, true, opts.eval);
  Vector r = residual_of(ev);
  res.residual = inf_norm(r);
  res.trace.push_back({0, res.residual, 0.0});

  while (res.residual > opts.tol) {
    if (res.iterations >= opts.max_iter) {
      std::ostringstream os;
      os << "h_invert: no convergence after " << opts.max_iter << " iterations (residual "
         << res.residual << "); the target may lie outside the range of h or the game is "
         << "ill-conditioned";
      throw MaxIterationsExceeded(os.str(), res);
    }
    Vector step;
    try {
      Vector neg(r);
      for (double& v : neg) v = -v;
      step = solve_linear(ev.jacobian, neg);
    } catch (const SingularMatrix& e) {
      throw SingularJacobian(std::string("h_invert: ") + e.what(), res);
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      Vector trial(res.dual.d);
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += alpha * step[i];
      HEvaluation trial_ev = h_evaluate(game, m, trial, true, opts.eval);
      Vector trial_r = residual_of(trial_ev);
      const double trial_norm = inf_norm(trial_r);
      if (trial_norm <= (1.0 - opts.armijo * alpha) * res.residual) {
        res.dual.d = std::move(trial);
        ev = std::move(trial_ev);
        r = std::move(trial_r);
        res.residual = trial_norm;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++res.iterations;
    if (!accepted) {
      std::ostringstream os;
      os << "h_invert: line search failed at iteration " << res.iterations << " (residual "
         << res.residual << ")";
      throw MaxIterationsExceeded(os.str(), res);
    }
    res.trace.push_back({res.iterations, res.residual, alpha});
  }
  return res;
}

}  // namespace rpnash
