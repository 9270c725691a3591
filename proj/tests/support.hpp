#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rpnash/equilibrium.hpp"
#include "rpnash/gmap.hpp"
#include "rpnash/market.hpp"
#include "rpnash/preferences.hpp"

namespace rpnash::fixtures {

inline Market two_atom_market() { return Market({0.5, 0.5}, {0.5, 1.5}); }

inline const Market& reference_market() {
  static const Market m = lognormal_market(0.3, 1.0, 64);
  return m;
}

enum class Draw { crra, sine, tanh };

/// Games drawn inside one of the two verified regimes.
///   close_to_crra: rra spread <= 0.2, any lambda the RRA bound allows
///   small_lambda:  lambda <= 0.1, spread up to half the base RRA
class GameSampler {
 public:
  explicit GameSampler(unsigned seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  Preference preference(Draw family, double max_spread) {
    const double r = uniform(0.8, 5.0);
    switch (family) {
      case Draw::crra: return Preference::crra(r);
      case Draw::sine: return Preference::sine_perturbed_crra(r, uniform(0.0, std::min(max_spread, 0.5 * r)));
      case Draw::tanh: return Preference::tanh_blend_crra(r, uniform(0.0, std::min(max_spread, 0.5 * r)));
    }
    return Preference::crra(r);
  }

  Game game(Draw family, bool small_lambda, int n = 0) {
    if (n == 0) n = integer(2, 4);
    std::vector<AgentSpec> agents;
    while (static_cast<int>(agents.size()) < n) {
      const Preference p = preference(family, small_lambda ? 2.5 : 0.1);
      const double lambda = small_lambda ? uniform(0.0, 0.1) : uniform(0.0, 1.0);
      const double kappa = (lambda / (n - 1)) / (1.0 + lambda / (n - 1));
      if (p.rra_lo() <= kappa + 0.05) continue;
      agents.emplace_back(p, lambda, n);
    }
    return Game(std::move(agents));
  }

  Game game_mixed(bool small_lambda) {
    const Draw d = static_cast<Draw>(integer(0, 2));
    return game(d, small_lambda);
  }

  Vector point(std::size_t n, double radius) {
    Vector y(n);
    for (double& v : y) v = uniform(-radius, radius);
    return y;
  }

  Vector wealth(std::size_t n) {
    Vector x(n);
    for (double& v : x) v = std::exp(uniform(std::log(0.2), std::log(5.0)));
    return x;
  }

 private:
  std::mt19937_64 rng_;
};

/// max |a_ij - b_ij| / max(|a_ij|, max_ij |b_ij|) over entries.
inline double matrix_relative_error(const Matrix& a, const Matrix& b) {
  double scale = 0.0;
  for (double v : b.data()) scale = std::max(scale, std::abs(v));
  double err = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    const double denom = std::max(std::abs(a.data()[k]), scale);
    if (denom > 0.0) err = std::max(err, std::abs(a.data()[k] - b.data()[k]) / denom);
  }
  return err;
}

/// Central differences of f: R^n -> R^n with step h.
template <class F>
Matrix central_difference(F f, const Vector& x, double h) {
  const std::size_t n = x.size();
  Matrix j(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    Vector xp(x), xm(x);
    xp[c] += h;
    xm[c] -= h;
    const Vector fp = f(xp), fm = f(xm);
    for (std::size_t r = 0; r < n; ++r) j(r, c) = (fp[r] - fm[r]) / (2.0 * h);
  }
  return j;
}

inline double relative_sup(const Matrix& a, const Matrix& b) {
  double scale = 0.0;
  for (double v : b.data()) scale = std::max(scale, std::abs(v));
  return sup_distance(a, b) / scale;
}

}  // namespace rpnash::fixtures
