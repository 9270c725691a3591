#include <gtest/gtest.h>

#include <random>

#include "rpnash/linalg.hpp"

using namespace rpnash;

TEST(Linalg, InfOpNorm) {
  EXPECT_DOUBLE_EQ(inf_op_norm(Matrix::identity(3)), 1.0);
  EXPECT_DOUBLE_EQ(inf_op_norm(Matrix{{-2, 1}, {1, -2}}), 3.0);
  const double d[] = {1.0, -7.0, 3.0};
  EXPECT_DOUBLE_EQ(inf_op_norm(Matrix::diagonal(d)), 7.0);
}

TEST(Linalg, SolveHandExamples) {
  const Vector ones{1.0, 1.0};
  const Vector a = solve_linear(Matrix{{-2, 1}, {1, -2}}, ones);
  EXPECT_NEAR(a[0], -1.0, 1e-15);
  EXPECT_NEAR(a[1], -1.0, 1e-15);
  const double d[] = {2.0, -4.0, 0.5};
  const Vector b{1.0, 2.0, 3.0};
  const Vector x = solve_linear(Matrix::diagonal(d), b);
  EXPECT_DOUBLE_EQ(x[0], 0.5);
  EXPECT_DOUBLE_EQ(x[1], -0.5);
  EXPECT_DOUBLE_EQ(x[2], 6.0);
}

TEST(Linalg, SingularDetected) {
  EXPECT_THROW(solve_linear(Matrix{{1, 2}, {2, 4}}, Vector{1, 1}), SingularMatrix);
  EXPECT_THROW(solve_linear(Matrix(2, 3), Vector{1, 1}), std::invalid_argument);
}

TEST(Linalg, RandomRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 8;
    Matrix m(n, n);
    Vector x(n);
    for (double& v : m.data()) v = u(rng);
    for (double& v : x) v = u(rng);
    const Vector b = m * x;
    const Vector y = solve_linear(m, b);
    const Vector r = m * y;
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(r[i] - b[i]));
    EXPECT_LE(res, 1e-10 * (1 + inf_norm(b)));
  }
}

TEST(Linalg, Submultiplicative) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix a(4, 4), b(4, 4);
    for (double& v : a.data()) v = u(rng);
    for (double& v : b.data()) v = u(rng);
    EXPECT_LE(inf_op_norm(a * b), inf_op_norm(a) * inf_op_norm(b) * (1 + 1e-15));
  }
}

TEST(PerturbedInverse, Examples) {
  const Matrix s{{3, 1}, {0, 2}};
  const BoundCheck same = perturbed_inverse_bound(s, s, 0.5);
  EXPECT_TRUE(same.holds);
  EXPECT_EQ(same.observed, 0.0);

  const Matrix t = Matrix::identity(3) + Matrix{{0.05, 0.04, 0}, {0, -0.09, 0}, {0.02, 0, 0.03}};
  const BoundCheck c = perturbed_inverse_bound(Matrix::identity(3), t, 0.1);
  ASSERT_TRUE(c.precondition);
  EXPECT_NEAR(c.bound, 0.1 / 0.9, 1e-15);
  EXPECT_TRUE(c.holds);

  EXPECT_FALSE(perturbed_inverse_bound(Matrix::identity(2), Matrix::identity(2) * 2.0, 0.1).precondition);
  EXPECT_FALSE(perturbed_inverse_bound(Matrix::identity(2), Matrix::identity(2), 1.0).precondition);
}

TEST(DiagDominant, Examples) {
  const double e[] = {0.25, 0.25};
  const BoundCheck tight = diag_dominant_inverse_bound(Matrix::diagonal(e), 0.25);
  EXPECT_TRUE(tight.holds);
  EXPECT_DOUBLE_EQ(tight.observed, 4.0);
  const BoundCheck c = diag_dominant_inverse_bound(Matrix{{2, -0.5}, {-0.5, 2}}, 1.5);
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.observed, 2.0 / 3.0, 1e-15);
  EXPECT_FALSE(diag_dominant_inverse_bound(Matrix{{1, -0.5}, {-0.5, 1}}, 1.0).precondition);
  EXPECT_FALSE(diag_dominant_inverse_bound(Matrix{{-2, 0}, {0, 2}}, 1.0).precondition);
}

TEST(Summation, CompensatedAndLogSumExp) {
  const Vector xs{1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(compensated_sum(xs), 2.0);
  const Vector a{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(a), 1000.0 + std::log(2.0), 1e-12);
}
