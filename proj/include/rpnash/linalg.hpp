#pragma once

// Small dense linear algebra over the infinity norm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rpnash {

using Vector = std::vector<double>;

/// Neumaier-compensated sum in index order. Deterministic for a fixed input.
inline double compensated_sum(std::span<const double> xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

/// ln(sum_k exp(a_k)) evaluated without overflow.
inline double log_sum_exp(std::span<const double> a) {
  if (a.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(a.begin(), a.end());
  if (!std::isfinite(m)) return m;
  std::vector<double> e(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) e[k] = std::exp(a[k] - m);
  return m + std::log(compensated_sum(e));
}

class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  Vector column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix& operator+=(const Matrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("Matrix: product dimension mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }
  friend Vector operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols_ != x.size()) throw std::invalid_argument("Matrix: matvec dimension mismatch");
    Vector y(a.rows_, 0.0);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }
  friend Vector operator*(const Matrix& a, const Vector& x) {
    return a * std::span<const double>(x);
  }

 private:
  void check_same(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("Matrix: dimension mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double inf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

/// Operator norm induced by the vector infinity norm: the largest row 1-norm.
inline double inf_op_norm(const Matrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

/// LU factorization with partial pivoting, PA = LU.
///
/// A pivot is rejected as singular when its magnitude is at most
/// `pivot_tol` times the largest magnitude in the original column.
class LuDecomposition {
 public:
  static constexpr double kPivotTol = 1e-13;

  explicit LuDecomposition(const Matrix& a, double pivot_tol = kPivotTol)
      : lu_(a), perm_(a.rows()) {
    if (!a.square()) throw std::invalid_argument("LU: matrix is not square");
    const std::size_t n = a.rows();
    std::vector<double> col_scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(a(i, j))) throw std::invalid_argument("LU: non-finite entry");
        col_scale[j] = std::max(col_scale[j], std::abs(a(i, j)));
      }
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
      if (!(std::abs(lu_(p, k)) > pivot_tol * col_scale[k])) {
        std::ostringstream os;
        os << "LU: pivot " << lu_(p, k) << " in column " << k
           << " below tolerance (column scale " << col_scale[k] << ")";
        throw SingularMatrix(os.str());
      }
      if (p != k) {
        std::swap(perm_[p], perm_[k]);
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(p, j), lu_(k, j));
      }
      const double piv = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = lu_(i, k) / piv;
        lu_(i, k) = f;
        if (f == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  std::size_t size() const { return lu_.rows(); }

  Vector solve(std::span<const double> b) const {
    const std::size_t n = size();
    if (b.size() != n) throw std::invalid_argument("LU: right-hand side dimension mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= lu_(ii, j) * x[j];
      x[ii] /= lu_(ii, ii);
    }
    return x;
  }

  Matrix inverse() const {
    const std::size_t n = size();
    Matrix inv(n, n);
    Vector e(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      e.assign(n, 0.0);
      e[k] = 1.0;
      Vector col = solve(e);
      for (std::size_t i = 0; i < n; ++i) inv(i, k) = col[i];
    }
    return inv;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

inline Vector solve_linear(const Matrix& m, std::span<const double> b) {
  return LuDecomposition(m).solve(b);
}

inline Matrix inverse(const Matrix& m) { return LuDecomposition(m).inverse(); }

/// Outcome of checking one of the perturbation bounds on a concrete instance.
struct BoundCheck {
  bool precondition = false;  // hypotheses of the bound are satisfied
  bool holds = false;         // precondition && observed <= bound
  double bound = 0.0;
  double observed = 0.0;
};

namespace detail {
inline bool within(double observed, double bound) {
  return observed <= bound * (1.0 + 1e-12) + 1e-14;
}
}  // namespace detail

/// Neumann-series perturbation bound for inverses.
///
/// If ||S - T|| <= eps / ||S^-1|| with 0 < eps < 1, then T is invertible and
/// ||S^-1 - T^-1|| <= eps / (1 - eps) * ||S^-1||.
inline BoundCheck perturbed_inverse_bound(const Matrix& s, const Matrix& t, double eps) {
  BoundCheck out;
  if (!(eps > 0.0 && eps < 1.0)) return out;
  const Matrix s_inv = inverse(s);
  const double s_inv_norm = inf_op_norm(s_inv);
  if (!(inf_op_norm(s - t) <= eps / s_inv_norm)) return out;
  out.precondition = true;
  out.bound = eps / (1.0 - eps) * s_inv_norm;
  try {
    out.observed = inf_op_norm(s_inv - inverse(t));
  } catch (const SingularMatrix&) {
    out.observed = std::numeric_limits<double>::infinity();
  }
  out.holds = detail::within(out.observed, out.bound);
  return out;
}

/// Strict diagonal dominance bound: if m_ii - sum_{j!=i} |m_ij| >= eps > 0 for
/// every row, M is invertible and ||M^-1|| <= 1/eps.
inline BoundCheck diag_dominant_inverse_bound(const Matrix& m, double eps) {
  BoundCheck out;
  if (!m.square() || !(eps > 0.0)) return out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (j != i) off += std::abs(m(i, j));
    if (!(m(i, i) > 0.0) || m(i, i) - off < eps) return out;
  }
  out.precondition = true;
  out.bound = 1.0 / eps;
  try {
    out.observed = inf_op_norm(inverse(m));
  } catch (const SingularMatrix&) {
    out.observed = std::numeric_limits<double>::infinity();
  }
  out.holds = detail::within(out.observed, out.bound);
  return out;
}

}  // namespace rpnash
