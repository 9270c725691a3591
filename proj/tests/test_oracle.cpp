#include <gtest/gtest.h>

#include "rpnash/oracle.hpp"
#include "support.hpp"

using namespace rpnash;

TEST(SingleAgent, LogUtilityClosedForm) {
  const Market& m = fixtures::reference_market();
  for (double x : {1.0, 0.3, 7.0}) {
    const SingleAgentResult r =
        single_agent_solve(Preference::crra(1), m, Numeraire::constant(m.atom_count()), x);
    EXPECT_NEAR(r.y, 1.0 / x, 1e-12 / x);
    for (std::size_t k = 0; k < m.atom_count(); ++k) {
      EXPECT_NEAR(r.g[k], x / m.z()[k], 1e-12 * x / m.z()[k]);
    }
  }
}

TEST(SingleAgent, CrraTwoOnTwoAtoms) {
  const Market m = fixtures::two_atom_market();
  const SingleAgentResult r = single_agent_solve(Preference::crra(2), m, Numeraire::constant(2), 1.0);
  const double c = (std::sqrt(0.5) + std::sqrt(1.5)) / 2;
  EXPECT_NEAR(r.g[0], std::pow(0.5, -0.5) / c, 1e-12);
  EXPECT_NEAR(r.g[1], std::pow(1.5, -0.5) / c, 1e-12);
}

TEST(SingleAgent, FocBudgetAndOptimality) {
  const Market m = lognormal_market(0.4, 1.0, 8);
  fixtures::GameSampler s(8);
  const Preference prefs[] = {Preference::crra(2.5), Preference::sine_perturbed_crra(2, 0.7),
                              Preference::tanh_blend_crra(3, 1.2)};
  for (const Preference& pref : prefs) {
    Vector lv(m.atom_count());
    for (double& v : lv) v = std::exp(s.uniform(-0.5, 0.5));
    const Numeraire l(lv);
    const double x = 1.7;
    const SingleAgentResult r = single_agent_solve(pref, m, l, x);
    EXPECT_NEAR(m.expect_q(r.g), x, 1e-12 * x);
    for (std::size_t k = 0; k < m.atom_count(); ++k) {
      const double lhs = pref.v(std::log(r.g[k]) - std::log(lv[k]));
      const double rhs = std::log(r.y) + std::log(lv[k]) + m.log_z()[k];
      EXPECT_NEAR(lhs, rhs, 1e-10);
    }
    const double best = expected_utility(pref, m, r.g, l);
    for (int trial = 0; trial < 20; ++trial) {
      Vector delta(m.atom_count());
      for (double& v : delta) v = s.uniform(-1.0, 1.0);
      const double shift = m.expect_q(delta);
      for (double& v : delta) v -= shift;  // keeps the budget
      double t = 0.2;
      for (std::size_t k = 0; k < delta.size(); ++k)
        if (delta[k] < 0) t = std::min(t, 0.5 * r.g[k] / -delta[k]);
      Vector other(r.g);
      for (std::size_t k = 0; k < other.size(); ++k) other[k] += t * delta[k];
      EXPECT_NEAR(m.expect_q(other), x, 1e-12);
      EXPECT_LE(expected_utility(pref, m, other, l), best + 1e-9);
    }
  }
}

TEST(SingleAgent, ConstantNumeraire) {
  // For CRRA(r) and L = c, g = c^{1-1/r} g_1 with g_1 the L = 1 optimizer
  // at budget x c^{-(1-1/r)}; checked through the budget.
  const Market& m = fixtures::reference_market();
  const Preference p = Preference::crra(3);
  const SingleAgentResult a = single_agent_solve(p, m, Numeraire::constant(m.atom_count(), 2.0), 1.0);
  const SingleAgentResult b = single_agent_solve(p, m, Numeraire::constant(m.atom_count(), 1.0), 1.0);
  EXPECT_NEAR(m.expect_q(a.g), 1.0, 1e-12);
  for (std::size_t k = 0; k < m.atom_count(); ++k) EXPECT_NEAR(a.g[k], b.g[k], 1e-12 * b.g[k]);
  EXPECT_NEAR(a.y, b.y * std::pow(2.0, 2.0), 1e-10 * a.y);
  EXPECT_THROW(single_agent_solve(p, m, Numeraire::constant(3), 1.0), std::invalid_argument);
  EXPECT_THROW(Numeraire(Vector{1.0, 0.0}), std::invalid_argument);
}

TEST(BestResponse, FixedPointOfSolvedEquilibrium) {
  const Market& m = fixtures::reference_market();
  const Game g = Game::from({Preference::tanh_blend_crra(2, 0.5), Preference::sine_perturbed_crra(3, 0.1),
                             Preference::crra(1.5)},
                            {0.4, 0.8, 0.2});
  const WealthVector x0({1.0, 2.0, 0.7});
  const EquilibriumProfile p = solve(g, m, x0);
  for (std::size_t i = 0; i < 3; ++i) {
    const Vector br = best_response(g, m, x0, p.wealth, i);
    for (std::size_t k = 0; k < br.size(); ++k) EXPECT_NEAR(br[k], p.wealth(k, i), 1e-7);
  }
  const FixedPointResult fp = fixed_point_iterate(g, m, x0, p.wealth, 10);
  EXPECT_TRUE(fp.converged);
  ASSERT_EQ(fp.history.size(), 1u);
  EXPECT_LE(fp.history[0], 1e-9);
}

TEST(BestResponse, NoCompetitionIgnoresOthers) {
  const Market& m = fixtures::reference_market();
  const Game g = Game::from({Preference::tanh_blend_crra(2, 0.5), Preference::crra(3)}, {0.0, 0.0});
  const WealthVector x0({1.0, 2.0});
  const EquilibriumProfile ref = no_competition_solve(g, m, x0);
  const FixedPointResult fp = fixed_point_iterate(g, m, x0, Matrix(m.atom_count(), 2, 1.0), 10);
  EXPECT_TRUE(fp.converged);
  ASSERT_EQ(fp.history.size(), 2u);
  EXPECT_EQ(fp.history[1], 0.0);
  EXPECT_LE(sup_distance(fp.profile, ref.wealth), 1e-10);
}

TEST(BestResponse, StepMovesTowardCrraEquilibrium) {
  const Market& m = fixtures::reference_market();
  const Game g = Game::from({Preference::crra(2), Preference::crra(2)}, {1.0, 1.0});
  const WealthVector x0({1.0, 1.0});
  const Matrix start = decoupled_profile(g, m, x0);
  const Matrix target = crra_closed_form(g, m, x0).wealth;
  const Vector br = best_response(g, m, x0, start, 0);
  double before = 0.0, after = 0.0;
  for (std::size_t k = 0; k < br.size(); ++k) {
    before = std::max(before, std::abs(start(k, 0) - target(k, 0)));
    after = std::max(after, std::abs(br[k] - target(k, 0)));
  }
  EXPECT_LT(after, before);
}

TEST(FixedPoint, SmallLambdaMatchesSolve) {
  const Market& m = fixtures::reference_market();
  const auto t = Preference::tanh_blend_crra(2, 0.5);
  const Game g = Game::from({t, t, Preference::tanh_blend_crra(3, 1)}, {0.05, 0.05, 0.05});
  const WealthVector x0({1.0, 0.5, 2.0});
  const FixedPointResult fp = fixed_point_iterate(g, m, x0, decoupled_profile(g, m, x0), 100);
  ASSERT_TRUE(fp.converged);
  EXPECT_LE(sup_distance(fp.profile, solve(g, m, x0).wealth), 1e-7);
  const Residuals r = verify(g, m, x0, fp.profile);
  EXPECT_LE(r.foc, 1e-7);
  EXPECT_LE(r.budget, 1e-7);
}
