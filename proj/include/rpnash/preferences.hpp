#pragma once

// Agent preferences in log-marginal form V(y) = ln U'(e^y).
//
// Every family is normalized so that V(0) = 0, i.e. U'(1) = 1, and comes with
// analytic bounds on the relative risk aversion -V'(y).

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rpnash/roots.hpp"

namespace rpnash {

class InvalidConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Family { crra, sine_perturbed_crra, tanh_blend_crra };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::crra: return "crra";
    case Family::sine_perturbed_crra: return "sine_perturbed_crra";
    case Family::tanh_blend_crra: return "tanh_blend_crra";
  }
  return "unknown";
}

namespace detail {

// ln cosh y without overflow.
inline double log_cosh(double y) {
  const double a = std::abs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace detail

class Preference {
 public:
  /// Constant relative risk aversion r: V(y) = -r y.
  static Preference crra(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw InvalidConfiguration("crra: risk aversion r must be a positive finite number");
    }
    return Preference(Family::crra, r, 0.0);
  }

  /// V(y) = -r y + amplitude (cos y - 1); RRA = r + amplitude sin y.
  static Preference sine_perturbed_crra(double r, double amplitude) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw InvalidConfiguration("sine_perturbed_crra: r must be a positive finite number");
    }
    if (!(amplitude >= 0.0) || !(amplitude < r)) {
      throw InvalidConfiguration(
          "sine_perturbed_crra: amplitude must satisfy 0 <= amplitude < r");
    }
    return Preference(Family::sine_perturbed_crra, r, amplitude);
  }

  /// V(y) = -r_mean y - delta ln cosh y; RRA = r_mean + delta tanh y.
  static Preference tanh_blend_crra(double r_mean, double delta) {
    if (!(r_mean > 0.0) || !std::isfinite(r_mean)) {
      throw InvalidConfiguration("tanh_blend_crra: r_mean must be a positive finite number");
    }
    if (!(delta >= 0.0) || !(delta < r_mean)) {
      throw InvalidConfiguration("tanh_blend_crra: delta must satisfy 0 <= delta < r_mean");
    }
    return Preference(Family::tanh_blend_crra, r_mean, delta);
  }

  Family family() const { return family_; }
  /// Base (or mean) risk aversion parameter.
  double base_rra() const { return r_; }
  /// Perturbation amplitude (sine) or blend width (tanh); 0 for CRRA.
  double spread() const { return spread_; }

  /// Certified lower bound on RRA, inf_y -V'(y).
  double rra_lo() const { return r_ - spread_; }
  /// Certified upper bound on RRA; +inf when only an unbounded certificate
  /// was declared.
  double rra_hi() const { return rra_hi_; }

  /// Replaces the analytic upper bound by a looser declared one (possibly
  /// +inf). A declared bound below the analytic one is rejected.
  Preference with_declared_rra_hi(double declared) const {
    if (!(declared >= r_ + spread_)) {
      throw InvalidConfiguration("rra_hi: declared upper bound is below the family's RRA range");
    }
    Preference p = *this;
    p.rra_hi_ = declared;
    return p;
  }

  double v(double y) const {
    switch (family_) {
      case Family::crra: return -r_ * y;
      case Family::sine_perturbed_crra: return -r_ * y + spread_ * (std::cos(y) - 1.0);
      case Family::tanh_blend_crra: return -r_ * y - spread_ * detail::log_cosh(y);
    }
    return 0.0;
  }

  double v_prime(double y) const {
    switch (family_) {
      case Family::crra: return -r_;
      case Family::sine_perturbed_crra: return -r_ - spread_ * std::sin(y);
      case Family::tanh_blend_crra: return -r_ - spread_ * std::tanh(y);
    }
    return 0.0;
  }

  /// Inverse of V. For the non-linear families, solved by bracketed Newton.
  double v_inv(double t) const { return solve_shifted(t, 0.0); }

  /// Solves V(u) + shift * u = t for u, where 0 <= shift < rra_lo.
  double solve_shifted(double t, double shift) const {
    if (family_ == Family::crra) return t / (shift - r_);
    const double slope = rra_lo() - shift;
    auto eval = [&](double u) {
      return std::pair{v(u) + shift * u, v_prime(u) + shift};
    };
    // V(0) = 0 and |slope| >= rra_lo - shift bound the root by |t| / slope.
    return solve_decreasing(eval, t, 0.0, std::abs(t) / slope, 1.0 + std::abs(t)).x;
  }

  double rra(double x) const { return -v_prime(std::log(x)); }

  /// U'(x) = exp V(ln x).
  double marginal(double x) const { return std::exp(v(std::log(x))); }

  /// I(y) = (U')^{-1}(y) = exp V^{-1}(ln y).
  double inverse_marginal(double y) const {
    if (!(y > 0.0)) throw std::domain_error("inverse_marginal: argument must be positive");
    return std::exp(v_inv(std::log(y)));
  }

  /// U(x) normalized by U(1) = 0, recovered from V by quadrature of
  /// U'(x) = exp V(ln x): U(x) = int_0^{ln x} exp(V(u) + u) du.
  double utility(double x) const {
    if (!(x > 0.0)) throw std::domain_error("utility: argument must be positive");
    const double b = std::log(x);
    if (b == 0.0) return 0.0;
    if (family_ == Family::crra) {
      const double a = 1.0 - r_;
      return a == 0.0 ? b : std::expm1(a * b) / a;
    }
    auto integrand = [this](double u) { return std::exp(v(u) + u); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, b, 15,
                                                                          1e-14);
  }

  std::string describe() const {
    std::ostringstream os;
    os << family_name(family_) << "(" << r_;
    if (family_ != Family::crra) os << ", " << spread_;
    os << ")";
    return os.str();
  }

  friend bool operator==(const Preference&, const Preference&) = default;

 private:
  Preference(Family f, double r, double spread)
      : family_(f), r_(r), spread_(spread), rra_hi_(r + spread) {}

  Family family_;
  double r_;
  double spread_;
  double rra_hi_;
};

/// One agent of the game: preference plus competition weight.
///
/// mu = lambda / (N - 1); requires rra_lo > mu / (1 + mu).
class AgentSpec {
 public:
  AgentSpec(Preference pref, double lambda, int n_players) : pref_(pref), lambda_(lambda) {
    if (n_players < 2) throw InvalidConfiguration("agent: the game needs at least 2 players");
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw InvalidConfiguration("agent: lambda must lie in [0, 1]");
    }
    mu_ = lambda / static_cast<double>(n_players - 1);
    if (!(pref.rra_lo() > kappa())) {
      std::ostringstream os;
      os.precision(17);
      os << "agent: RRA lower bound violated: rra_lo = " << pref.rra_lo()
         << " must exceed mu/(1+mu) = " << kappa() << " (lambda = " << lambda
         << ", N = " << n_players << ")";
      throw InvalidConfiguration(os.str());
    }
  }

  const Preference& pref() const { return pref_; }
  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  /// mu / (1 + mu).
  double kappa() const { return mu_ / (1.0 + mu_); }
  /// Margin in the RRA lower bound, eps = rra_lo - mu / (1 + mu) > 0.
  double epsilon() const { return pref_.rra_lo() - kappa(); }

 private:
  Preference pref_;
  double lambda_;
  double mu_ = 0.0;
};

/// W = inverse of u -> V(u) + (mu / (1 + mu)) u.
inline double w(const AgentSpec& a, double t) { return a.pref().solve_shifted(t, a.kappa()); }

/// dW/dt = 1 / (V'(W(t)) + mu / (1 + mu)), in [-1/eps, 0).
inline double w_prime_at(const AgentSpec& a, double w_value) {
  return 1.0 / (a.pref().v_prime(w_value) + a.kappa());
}

inline double inverse_marginal(const Preference& p, double y) { return p.inverse_marginal(y); }

/// Reformulation against the geometric mean of all players: the competition
/// weight becomes lambda N / (N - 1 + lambda) and the utility becomes
/// Ubar(x) = U(x^{1+mu}).
struct BarTransform {
  Preference pref;
  double mu;
  double bar_lambda;

  /// RRA of Ubar at x from its first and second derivatives:
  /// Ubar'(x) = (1+mu) x^mu U'(x^{1+mu}),
  /// Ubar''(x) = (1+mu)^2 x^{2mu} U''(x^{1+mu}) + mu (1+mu) x^{mu-1} U'(x^{1+mu}),
  /// with U''(x) = U'(x) V'(ln x) / x.
  double rra_direct(double x) const {
    const double xp = std::pow(x, 1.0 + mu);
    const double u1 = pref.marginal(xp);
    const double u2 = u1 * pref.v_prime(std::log(xp)) / xp;
    const double d1 = (1.0 + mu) * std::pow(x, mu) * u1;
    const double d2 = (1.0 + mu) * (1.0 + mu) * std::pow(x, 2.0 * mu) * u2 +
                      mu * (1.0 + mu) * std::pow(x, mu - 1.0) * u1;
    return -x * d2 / d1;
  }

  /// -mu + (1 + mu) RRA[U](x^{1+mu}).
  double rra_identity(double x) const {
    return -mu + (1.0 + mu) * pref.rra(std::pow(x, 1.0 + mu));
  }
};

inline BarTransform bar_transform(const AgentSpec& a, int n_players) {
  const double lambda = a.lambda();
  const double bar = lambda * n_players / (n_players - 1 + lambda);
  return {a.pref(), a.mu(), bar};
}

}  // namespace rpnash
