#include <gtest/gtest.h>

#include "rpnash/hmap.hpp"
#include "support.hpp"

using namespace rpnash;

TEST(HMap, CrraTangentHandExample) {
  const Game g = Game::from({Preference::crra(2), Preference::crra(2)}, {1.0, 1.0});
  const Market m = fixtures::two_atom_market();
  const CrraTangent t = crra_tangent(g, m);
  EXPECT_NEAR(t.exponents[0], -1.0, 1e-15);
  EXPECT_NEAR(t.exponents[1], -1.0, 1e-15);
  // E_Q[z^-1] = E_P[1] = 1.
  EXPECT_NEAR(t.h0[0], 0.0, 1e-15);
}

TEST(HMap, WeightsSumToOneAndHIsLogBudget) {
  fixtures::GameSampler s(2);
  const Market& m = fixtures::reference_market();
  const Game g = s.game_mixed(true);
  const DualVector d{s.point(g.size(), 0.5)};
  const HEvaluation e = h_evaluate(g, m, d.d, false);
  const Matrix wealth = h_cal(g, m, d);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < m.atom_count(); ++k) total += e.weights(k, i);
    EXPECT_NEAR(total, 1.0, 1e-14);
    EXPECT_NEAR(e.h[i], std::log(m.expect_q(wealth.column(i))), 1e-13);
  }
}

TEST(HMap, JacobianMatchesFiniteDifference) {
  fixtures::GameSampler s(9);
  const Market m = lognormal_market(0.3, 1.0, 24);
  for (int t = 0; t < 40; ++t) {
    const Game g = s.game_mixed(t % 2 == 0);
    const Vector d = s.point(g.size(), 1.0);
    const Matrix fd = fixtures::central_difference(
        [&](const Vector& x) { return h_apply(g, m, DualVector{x}); }, d, 1e-5);
    EXPECT_LE(fixtures::matrix_relative_error(h_jacobian(g, m, DualVector{d}), fd), 1e-6);
  }
}

TEST(HMap, ParallelEvaluationIsBitIdentical) {
  fixtures::GameSampler s(4);
  const Market& m = fixtures::reference_market();
  const Game g = s.game_mixed(false);
  const Vector d = s.point(g.size(), 1.0);
  const HEvaluation a = h_evaluate(g, m, d, true, {1});
  const HEvaluation b = h_evaluate(g, m, d, true, {4});
  EXPECT_EQ(a.h, b.h);
  EXPECT_EQ(a.jacobian.data(), b.jacobian.data());
}

TEST(HInvert, RoundTrip) {
  fixtures::GameSampler s(31);
  const Market& m = fixtures::reference_market();
  for (int t = 0; t < 60; ++t) {
    const Game g = s.game_mixed(t % 2 == 0);
    const DualVector d{s.point(g.size(), 1.0)};
    const Vector target = h_apply(g, m, d);
    const NewtonResult r = h_invert(g, m, target);
    EXPECT_LE(r.residual, 1e-10);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(r.dual.d[i], d.d[i], 1e-8);
    EXPECT_EQ(r.trace.size(), static_cast<std::size_t>(r.iterations) + 1);
  }
}

TEST(HInvert, CrraNeedsNoSteps) {
  const Game g = Game::from({Preference::crra(0.8), Preference::crra(5), Preference::crra(2)},
                            {1.0, 0.3, 0.7});
  const Vector target{0.1, -0.4, 0.9};
  const NewtonResult r = h_invert(g, fixtures::reference_market(), target);
  EXPECT_LE(r.iterations, 1);
  EXPECT_LE(r.residual, 1e-10);
}

TEST(HInvert, IterationCapReported) {
  const Game g = Game::from({Preference::tanh_blend_crra(2, 1.0), Preference::crra(3)}, {0.9, 0.9});
  NewtonOptions o;
  o.max_iter = 0;
  o.tol = 1e-300;
  try {
    h_invert(g, fixtures::reference_market(), Vector{0.0, 0.0}, o);
    FAIL() << "expected MaxIterationsExceeded";
  } catch (const MaxIterationsExceeded& e) {
    EXPECT_EQ(e.best().iterations, 0);
    EXPECT_GT(e.best().residual, 0.0);
  }
}

TEST(HInvert, DimensionMismatch) {
  const Game g = Game::from({Preference::crra(2), Preference::crra(2)}, {0.5, 0.5});
  EXPECT_THROW(h_invert(g, fixtures::reference_market(), Vector{0.0}), std::invalid_argument);
}
