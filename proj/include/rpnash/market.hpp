#pragma once

// Complete market represented by a finite-atom state-price density.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "rpnash/linalg.hpp"

namespace rpnash {

/// Finite atomic probability space carrying the density Z = dQ/dP.
///
/// Invariants: p_k > 0, sum p = 1, z_k > 0 and E_P[Z] = 1.
class Market {
 public:
  static constexpr double kProbabilityTol = 1e-14;
  static constexpr double kDensityTol = 1e-12;

  Market(std::vector<double> p, std::vector<double> z) : p_(std::move(p)), z_(std::move(z)) {
    if (p_.empty()) throw std::invalid_argument("Market: at least one atom is required");
    if (p_.size() != z_.size()) {
      throw std::invalid_argument("Market: p and z must have the same number of atoms");
    }
    for (std::size_t k = 0; k < p_.size(); ++k) {
      if (!(p_[k] > 0.0) || !std::isfinite(p_[k])) {
        throw std::invalid_argument("Market: probability p[" + std::to_string(k) +
                                    "] must be positive");
      }
      if (!(z_[k] > 0.0) || !std::isfinite(z_[k])) {
        throw std::invalid_argument("Market: density z[" + std::to_string(k) +
                                    "] must be positive");
      }
    }
    const double mass = compensated_sum(p_);
    if (std::abs(mass - 1.0) > kProbabilityTol * static_cast<double>(p_.size())) {
      std::ostringstream os;
      os.precision(17);
      os << "Market: probabilities must sum to 1 (got " << mass << ")";
      throw std::invalid_argument(os.str());
    }
    const double ez = expect_p(z_);
    if (std::abs(ez - 1.0) > kDensityTol) {
      std::ostringstream os;
      os.precision(17);
      os << "Market: E_P[Z] must equal 1 (got " << ez << ")";
      throw std::invalid_argument(os.str());
    }
    log_z_.resize(z_.size());
    std::transform(z_.begin(), z_.end(), log_z_.begin(), [](double v) { return std::log(v); });
  }

  std::size_t atom_count() const { return p_.size(); }
  std::span<const double> p() const { return p_; }
  std::span<const double> z() const { return z_; }
  std::span<const double> log_z() const { return log_z_; }

  /// E_P[f] = sum_k p_k f_k.
  double expect_p(std::span<const double> f) const {
    check_size(f);
    std::vector<double> terms(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) terms[k] = p_[k] * f[k];
    return compensated_sum(terms);
  }

  /// E_Q[f] = sum_k p_k z_k f_k.
  double expect_q(std::span<const double> f) const {
    check_size(f);
    std::vector<double> terms(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) terms[k] = p_[k] * z_[k] * f[k];
    return compensated_sum(terms);
  }

  /// ln E_Q[exp(a)] for log-values a, stable for large |a|.
  double log_expect_q_exp(std::span<const double> a) const {
    check_size(a);
    std::vector<double> terms(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) terms[k] = std::log(p_[k]) + log_z_[k] + a[k];
    return log_sum_exp(terms);
  }

 private:
  void check_size(std::span<const double> f) const {
    if (f.size() != p_.size()) {
      throw std::invalid_argument("Market: function has " + std::to_string(f.size()) +
                                  " entries, market has " + std::to_string(p_.size()) +
                                  " atoms");
    }
  }

  std::vector<double> p_;
  std::vector<double> z_;
  std::vector<double> log_z_;
};

inline double expect_p(const Market& m, std::span<const double> f) { return m.expect_p(f); }
inline double expect_q(const Market& m, std::span<const double> f) { return m.expect_q(f); }

struct GaussHermiteRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;  // for the weight function exp(-x^2)
};

/// Gauss-Hermite nodes and weights via Newton iteration on the orthonormal
/// Hermite recurrence, with the usual asymptotic initial guesses.
inline GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  std::vector<double> x(n), w(n);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    int its = 0;
    for (; its < 100; ++its) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    if (its == 100) throw std::runtime_error("gauss_hermite: Newton iteration did not converge");
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  GaussHermiteRule rule;
  rule.nodes.assign(x.rbegin(), x.rend());
  rule.weights.assign(w.rbegin(), w.rend());
  return rule;
}

/// Discretized lognormal state-price density of a constant market price of
/// risk `theta` over `horizon`: ln Z ~ N(-theta^2 T / 2, theta^2 T) under P.
/// Atoms with probability below 1e-300 are dropped; z is rescaled so that
/// E_P[Z] = 1 holds exactly up to rounding.
inline Market lognormal_market(double theta, double horizon, int nodes) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("lognormal_market: theta must be >= 0");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("lognormal_market: horizon must be > 0");
  }
  if (nodes < 2) throw std::invalid_argument("lognormal_market: nodes must be >= 2");

  const GaussHermiteRule rule = gauss_hermite(nodes);
  const double variance = theta * theta * horizon;
  const double mean = -0.5 * variance;
  const double sigma = std::sqrt(variance);
  std::vector<double> p, log_z;
  for (int i = 0; i < nodes; ++i) {
    const double prob = rule.weights[i] / std::sqrt(std::numbers::pi);
    if (prob < 1e-300) continue;
    p.push_back(prob);
    log_z.push_back(mean + sigma * std::numbers::sqrt2 * rule.nodes[i]);
  }
  const double mass = compensated_sum(p);
  for (double& v : p) v /= mass;

  std::vector<double> z(log_z.size());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = std::exp(log_z[k]);
  std::vector<double> terms(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) terms[k] = p[k] * z[k];
  const double scale = compensated_sum(terms);
  for (double& v : z) v /= scale;
  return Market(std::move(p), std::move(z));
}

}  // namespace rpnash
