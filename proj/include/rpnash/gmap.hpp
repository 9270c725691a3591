#pragma once

// The coupled log-marginal map
//
//   G^i(y) = V_i(y_i - mu_i sum_{j!=i} y_j) - mu_i sum_{j!=i} y_j,
//
// whose level sets at D + ln Z characterize the equilibria, together with its
// Jacobian, its inverse and the inverse Jacobian.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "rpnash/linalg.hpp"
#include "rpnash/preferences.hpp"
#include "rpnash/roots.hpp"

namespace rpnash {

/// N >= 2 agents with validated preferences and competition weights.
class Game {
 public:
  explicit Game(std::vector<AgentSpec> agents) : agents_(std::move(agents)) {
    const std::size_t n = agents_.size();
    if (n < 2) throw InvalidConfiguration("game: at least 2 agents are required");
    const double expected_scale = 1.0 / static_cast<double>(n - 1);
    bool all_full = true;
    bool any_bounded = false;
    for (std::size_t i = 0; i < n; ++i) {
      const AgentSpec& a = agents_[i];
      if (std::abs(a.mu() - a.lambda() * expected_scale) > 1e-15) {
        throw InvalidConfiguration("game: agent " + std::to_string(i) +
                                   " was built for a different number of players");
      }
      all_full = all_full && a.lambda() == 1.0;
      any_bounded = any_bounded || std::isfinite(a.pref().rra_hi());
    }
    if (all_full && !any_bounded) {
      throw InvalidConfiguration(
          "game: with lambda = 1 for every agent, at least one agent needs a finite RRA upper "
          "bound (rra_hi)");
    }
  }

  /// Convenience: builds every AgentSpec for this number of players.
  static Game from(const std::vector<Preference>& prefs, const std::vector<double>& lambdas) {
    if (prefs.size() != lambdas.size()) {
      throw InvalidConfiguration("game: preferences and lambdas differ in length");
    }
    std::vector<AgentSpec> agents;
    const int n = static_cast<int>(prefs.size());
    for (int i = 0; i < n; ++i) agents.emplace_back(prefs[i], lambdas[i], n);
    return Game(std::move(agents));
  }

  std::size_t size() const { return agents_.size(); }
  const AgentSpec& agent(std::size_t i) const { return agents_[i]; }
  const std::vector<AgentSpec>& agents() const { return agents_; }

  bool all_crra() const {
    return std::all_of(agents_.begin(), agents_.end(),
                       [](const AgentSpec& a) { return a.pref().family() == Family::crra; });
  }
  bool no_competition() const {
    return std::all_of(agents_.begin(), agents_.end(),
                       [](const AgentSpec& a) { return a.lambda() == 0.0; });
  }

 private:
  std::vector<AgentSpec> agents_;
};

namespace detail {

inline void check_dim(const Game& game, std::span<const double> x, const char* what) {
  if (x.size() != game.size()) {
    std::ostringstream os;
    os << what << ": expected " << game.size() << " entries, got " << x.size();
    throw std::invalid_argument(os.str());
  }
}

// Arguments of V_i in G: y_i - mu_i (sum y - y_i).
inline Vector marginal_arguments(const Game& game, std::span<const double> y) {
  const double total = compensated_sum(y);
  Vector args(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    args[i] = y[i] - game.agent(i).mu() * (total - y[i]);
  }
  return args;
}

}  // namespace detail

inline Vector g_apply(const Game& game, std::span<const double> y) {
  detail::check_dim(game, y, "g_apply");
  const double total = compensated_sum(y);
  Vector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double others = game.agent(i).mu() * (total - y[i]);
    out[i] = game.agent(i).pref().v(y[i] - others) - others;
  }
  return out;
}

/// JG from the slopes v_i = V_i'(.) at the current point:
/// diagonal v_i, off-diagonal -(v_i + 1) mu_i.
inline Matrix g_jacobian_from_slopes(const Game& game, std::span<const double> slopes) {
  const std::size_t n = game.size();
  Matrix j(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double off = -(slopes[i] + 1.0) * game.agent(i).mu();
    for (std::size_t k = 0; k < n; ++k) j(i, k) = i == k ? slopes[i] : off;
  }
  return j;
}

inline Vector g_slopes(const Game& game, std::span<const double> y) {
  const Vector args = detail::marginal_arguments(game, y);
  Vector slopes(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) slopes[i] = game.agent(i).pref().v_prime(args[i]);
  return slopes;
}

inline Matrix g_jacobian(const Game& game, std::span<const double> y) {
  detail::check_dim(game, y, "g_jacobian");
  return g_jacobian_from_slopes(game, g_slopes(game, y));
}

/// Constant Jacobian of the CRRA game with risk aversions `r`
/// (diagonal -r_i, off-diagonal (r_i - 1) mu_i).
inline Matrix crra_jacobian(const Game& game, std::span<const double> r) {
  Vector slopes(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) slopes[i] = -r[i];
  return g_jacobian_from_slopes(game, slopes);
}

/// Left minus right side of the scalar equation in s = sum_i y_i,
///   sum_i W_i(z_i + kappa_i s) / (1 + mu_i) - (1 - sum_i kappa_i) s,
/// together with its derivative in s. Strictly decreasing in s.
struct SEquation {
  double value;
  double derivative;
};

inline SEquation s_equation(const Game& game, std::span<const double> z, double s) {
  double lhs = 0.0, dlhs = 0.0, kappa_sum = 0.0;
  for (std::size_t i = 0; i < game.size(); ++i) {
    const AgentSpec& a = game.agent(i);
    const double k = a.kappa();
    const double wi = w(a, z[i] + k * s);
    lhs += wi / (1.0 + a.mu());
    dlhs += k / (1.0 + a.mu()) * w_prime_at(a, wi);
    kappa_sum += k;
  }
  return {lhs - (1.0 - kappa_sum) * s, dlhs - (1.0 - kappa_sum)};
}

/// Uniform lower bound on -d/ds of the s-equation:
/// (1 - sum kappa_i) + sum_i kappa_i / ((1 + mu_i)(rra_hi_i - kappa_i)).
inline double s_equation_slope_floor(const Game& game) {
  double kappa_sum = 0.0, extra = 0.0;
  for (const AgentSpec& a : game.agents()) {
    kappa_sum += a.kappa();
    const double hi = a.pref().rra_hi();
    if (std::isfinite(hi)) extra += a.kappa() / ((1.0 + a.mu()) * (hi - a.kappa()));
  }
  return std::max(0.0, 1.0 - kappa_sum) + extra;
}

struct GInverse {
  Vector y;
  double s = 0.0;  // sum of the components of y
};

/// Inverts G by reducing to the scalar s-equation, then
/// y_i = (W_i(z_i + kappa_i s) + mu_i s) / (1 + mu_i).
inline GInverse g_invert_detailed(const Game& game, std::span<const double> z) {
  detail::check_dim(game, z, "g_invert");
  for (double v : z) {
    if (!std::isfinite(v)) throw std::invalid_argument("g_invert: non-finite input");
  }
  const double scale = 1.0 + inf_norm(z);
  auto eval = [&](double s) {
    const SEquation e = s_equation(game, z, s);
    return std::pair{e.value, e.derivative};
  };
  const double phi0 = s_equation(game, z, 0.0).value;
  const double floor = s_equation_slope_floor(game);
  const double step =
      floor > 0.0 ? std::abs(phi0) / floor : std::abs(phi0) + 1.0;
  ScalarRoot root;
  try {
    root = solve_decreasing(eval, 0.0, 0.0, step, scale);
  } catch (const NonConvergence& e) {
    std::ostringstream os;
    os << "g_invert: s-equation root not found (phi(0) = " << phi0 << ", slope floor " << floor
       << "): " << e.what();
    throw NonConvergence(os.str());
  }
  GInverse out;
  out.s = root.x;
  out.y.resize(game.size());
  for (std::size_t i = 0; i < game.size(); ++i) {
    const AgentSpec& a = game.agent(i);
    out.y[i] = (w(a, z[i] + a.kappa() * out.s) + a.mu() * out.s) / (1.0 + a.mu());
  }
  return out;
}

inline Vector g_invert(const Game& game, std::span<const double> z) {
  return g_invert_detailed(game, z).y;
}

/// [JG(y)]^{-1} by LU with partial pivoting.
inline Matrix g_inverse_jacobian_at(const Game& game, std::span<const double> y) {
  return inverse(g_jacobian(game, y));
}

/// J[G^{-1}](z) = [JG(G^{-1}(z))]^{-1}.
inline Matrix g_inverse_jacobian(const Game& game, std::span<const double> z) {
  return g_inverse_jacobian_at(game, g_invert(game, z));
}

/// Column-by-column inverse of the matrix with diagonal v_i and off-diagonal
/// -(v_i + 1) mu_i. For column k, with a_i = 1 / (v_i + kappa_i),
///   s = a_k / (1 + mu_k) / (1 - sum_i (v_i + 1) kappa_i a_i),
///   u_ik = (1 + a_i / (1 + mu_i)) kappa_i s            (i != k),
///   u_kk = a_k / (1 + mu_k) + (1 + a_k / (1 + mu_k)) kappa_k s.
inline Matrix explicit_inverse_jacobian(const Game& game, std::span<const double> slopes) {
  const std::size_t n = game.size();
  Vector a(n), kappa(n), mu(n);
  double coupling = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mu[i] = game.agent(i).mu();
    kappa[i] = mu[i] / (1.0 + mu[i]);
    a[i] = 1.0 / (slopes[i] + kappa[i]);
    coupling += (slopes[i] + 1.0) * kappa[i] * a[i];
  }
  const double denom = 1.0 - coupling;
  if (!(denom > 0.0)) {
    throw SingularMatrix("explicit_inverse_jacobian: degenerate coupling denominator");
  }
  Matrix inv(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = a[k] / (1.0 + mu[k]) / denom;
    for (std::size_t i = 0; i < n; ++i) {
      const double coupled = (1.0 + a[i] / (1.0 + mu[i])) * kappa[i] * s;
      inv(i, k) = i == k ? a[k] / (1.0 + mu[k]) + coupled : coupled;
    }
  }
  return inv;
}

/// Uniform bound L >= sup_z ||J[G^{-1}](z)||_inf assembled from eps_i,
/// rra_hi_i and mu_i by bounding each term of the explicit inverse.
inline double lipschitz_bound(const Game& game) {
  const double floor = s_equation_slope_floor(game);
  if (!(floor > 0.0)) {
    throw InvalidConfiguration(
        "lipschitz_bound: unbounded configuration (all lambda = 1 and no finite rra_hi)");
  }
  const std::size_t n = game.size();
  // |s_k| <= 1 / (eps_k (1 + mu_k) floor); the column sum of |s_k| enters every row.
  double s_total = 0.0;
  for (const AgentSpec& a : game.agents()) {
    s_total += 1.0 / (a.epsilon() * (1.0 + a.mu()) * floor);
  }
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const AgentSpec& a = game.agent(i);
    const double one_plus = 1.0 + a.mu();
    // a_i ranges over [-1/eps_i, -1/(rra_hi_i - kappa_i)].
    const double c_lo = std::abs(1.0 - 1.0 / (a.epsilon() * one_plus));
    const double hi = a.pref().rra_hi();
    const double c_hi =
        std::isfinite(hi) ? std::abs(1.0 - 1.0 / ((hi - a.kappa()) * one_plus)) : 1.0;
    const double c = std::max(c_lo, c_hi);
    const double row = 1.0 / (a.epsilon() * one_plus) + c * a.kappa() * s_total;
    bound = std::max(bound, row);
  }
  return bound;
}

}  // namespace rpnash
