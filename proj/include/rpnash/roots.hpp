#pragma once

// Scalar root finding for strictly decreasing functions.

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace rpnash {

/// Raised when an iterative solver that should converge under the type
/// invariants fails to do so. Always indicates an internal error or a
/// configuration that slipped past validation.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScalarSolveOptions {
  double residual_tol = 1e-14;  // relative to `scale`
  int max_expansions = 1100;
  int max_iterations = 300;
};

struct ScalarRoot {
  double x = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

inline double step_floor(double x) { return 1e-12 * (1.0 + std::abs(x)); }

}  // namespace detail

/// Solves f(x) = target for a strictly decreasing f.
///
/// `eval(x)` returns the pair {f(x), f'(x)}. A bracket is obtained by
/// geometric expansion from `start` with first step `step` (doubling), then a
/// safeguarded Newton iteration runs inside the bracket: Newton steps that
/// leave the bracket or fail to halve it are replaced by bisection. Stops when
/// |f(x) - target| <= opts.residual_tol * scale, or when the bracket has
/// collapsed to adjacent doubles.
template <class Eval>
ScalarRoot solve_decreasing(Eval&& eval, double target, double start,
                            double step, double scale,
                            const ScalarSolveOptions& opts = {}) {
  const double tol = opts.residual_tol * scale;
  const double r0 = eval(start).first - target;
  if (!std::isfinite(r0)) {
    throw NonConvergence("solve_decreasing: non-finite value at start point");
  }
  if (std::abs(r0) <= tol) return {start, r0, 0};

  // lo has residual > 0, hi has residual < 0 (f decreasing).
  double lo = start, hi = start;
  double r_lo = r0, r_hi = r0;
  step = std::max(std::abs(step), detail::step_floor(start));
  int expansions = 0;
  if (r0 > 0.0) {
    for (;;) {
      hi = start + step;
      r_hi = eval(hi).first - target;
      if (r_hi <= 0.0) break;
      lo = hi;
      r_lo = r_hi;
      step *= 2.0;
      if (++expansions > opts.max_expansions || !std::isfinite(hi)) {
        std::ostringstream os;
        os << "solve_decreasing: no sign change found to the right of " << start
           << " (last point " << hi << ", residual " << r_hi << ")";
        throw NonConvergence(os.str());
      }
    }
  } else {
    for (;;) {
      lo = start - step;
      r_lo = eval(lo).first - target;
      if (r_lo >= 0.0) break;
      hi = lo;
      r_hi = r_lo;
      step *= 2.0;
      if (++expansions > opts.max_expansions || !std::isfinite(lo)) {
        std::ostringstream os;
        os << "solve_decreasing: no sign change found to the left of " << start
           << " (last point " << lo << ", residual " << r_lo << ")";
        throw NonConvergence(os.str());
      }
    }
  }
  if (r_lo == 0.0) return {lo, 0.0, expansions};
  if (r_hi == 0.0) return {hi, 0.0, expansions};

  // Start Newton from whichever end is closer in residual.
  double x = std::abs(r_lo) < std::abs(r_hi) ? lo : hi;
  ScalarRoot best{x, std::abs(r_lo) < std::abs(r_hi) ? r_lo : r_hi, 0};
  double prev_abs = std::numeric_limits<double>::infinity();
  bool last_was_newton = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    auto [fx, dfx] = eval(x);
    double r = fx - target;
    if (std::abs(r) <= std::abs(best.residual)) best = {x, r, it};
    if (std::abs(r) <= tol) return {x, r, it};
    if (r > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    // A Newton step must stay inside the bracket and, if the previous step
    // was Newton too, must have at least halved the residual.
    bool stalled = last_was_newton && std::abs(r) > 0.5 * prev_abs;
    double next = x - r / dfx;
    last_was_newton = std::isfinite(next) && next > lo && next < hi && !stalled;
    if (!last_was_newton) next = 0.5 * (lo + hi);
    prev_abs = std::abs(r);
    if (next <= lo || next >= hi) {
      // Bracket exhausted at double precision.
      best.iterations = it;
      return best;
    }
    x = next;
  }
  std::ostringstream os;
  os << "solve_decreasing: iteration limit reached in bracket [" << lo << ", "
     << hi << "], best residual " << best.residual;
  throw NonConvergence(os.str());
}

}  // namespace rpnash
