#include <gtest/gtest.h>

#include "rpnash/gmap.hpp"
#include "support.hpp"

using namespace rpnash;
using fixtures::Draw;

namespace {
Game crra22() { return Game::from({Preference::crra(2), Preference::crra(2)}, {1.0, 1.0}); }
}  // namespace

TEST(Game, Validation) {
  EXPECT_THROW(Game::from({Preference::crra(2)}, {0.5}), InvalidConfiguration);
  EXPECT_THROW(Game::from({Preference::crra(2), Preference::crra(2)}, {0.5}), InvalidConfiguration);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Game::from({Preference::crra(2).with_declared_rra_hi(inf),
                           Preference::tanh_blend_crra(2, 0.5).with_declared_rra_hi(inf)},
                          {1.0, 1.0}),
               InvalidConfiguration);
  // One finite bound is enough.
  EXPECT_NO_THROW(Game::from({Preference::crra(2).with_declared_rra_hi(inf), Preference::crra(3)},
                             {1.0, 1.0}));
  EXPECT_TRUE(crra22().all_crra());
  EXPECT_FALSE(crra22().no_competition());
}

TEST(GMap, HandExample) {
  const Game g = crra22();
  // G^i(y) = -2 (y_i - y_j) - y_j.
  const Vector y{-1.0, -1.0};
  const Vector out = g_apply(g, y);
  EXPECT_DOUBLE_EQ(out[0], 1.0);
  EXPECT_DOUBLE_EQ(out[1], 1.0);
  const Matrix j = g_jacobian(g, y);
  EXPECT_DOUBLE_EQ(j(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(j(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(j(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(j(1, 1), -2.0);
  const GInverse inv = g_invert_detailed(g, Vector{1.0, 1.0});
  EXPECT_NEAR(inv.y[0], -1.0, 1e-14);
  EXPECT_NEAR(inv.y[1], -1.0, 1e-14);
  EXPECT_NEAR(inv.s, -2.0, 1e-14);
}

TEST(GMap, CrraJacobianAndLipschitz) {
  const Game g = crra22();
  const Vector r{2.0, 2.0};
  const Matrix jc = crra_jacobian(g, r);
  EXPECT_DOUBLE_EQ(jc(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(jc(0, 1), 1.0);
  EXPECT_NEAR(lipschitz_bound(g), 1.0, 1e-14);
  EXPECT_NEAR(inf_op_norm(g_inverse_jacobian(g, Vector{0.3, -0.2})), 1.0, 1e-14);

  const Game free = Game::from({Preference::crra(2), Preference::crra(4)}, {0.0, 0.0});
  EXPECT_NEAR(lipschitz_bound(free), 0.5, 1e-15);
}

TEST(GMap, SEquationIsDecreasing) {
  fixtures::GameSampler s(3);
  for (int t = 0; t < 50; ++t) {
    const Game g = s.game_mixed(t % 2 == 0);
    const Vector z = s.point(g.size(), 4.0);
    const double floor = s_equation_slope_floor(g);
    EXPECT_GT(floor, 0.0);
    for (double x = -10; x <= 10; x += 2.5) {
      const SEquation e = s_equation(g, z, x);
      EXPECT_LE(e.derivative, -floor * (1 - 1e-12));
    }
  }
}

TEST(GMap, RoundTripAllFamilies) {
  fixtures::GameSampler s(17);
  for (Draw d : {Draw::crra, Draw::sine, Draw::tanh}) {
    for (int t = 0; t < 200; ++t) {
      const Game g = s.game(d, t % 2 == 0);
      const Vector y = s.point(g.size(), 3.0);
      const Vector back = g_invert(g, g_apply(g, y));
      for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(back[i], y[i], 1e-10);
    }
  }
}

TEST(GMap, JacobianMatchesFiniteDifference) {
  fixtures::GameSampler s(5);
  for (int t = 0; t < 100; ++t) {
    const Game g = s.game_mixed(t % 2 == 0);
    const Vector y = s.point(g.size(), 3.0);
    const Matrix fd =
        fixtures::central_difference([&](const Vector& x) { return g_apply(g, x); }, y, 1e-5);
    EXPECT_LE(fixtures::matrix_relative_error(g_jacobian(g, y), fd), 1e-6);
  }
}

TEST(GMap, ExplicitInverseMatchesLu) {
  fixtures::GameSampler s(23);
  for (int t = 0; t < 200; ++t) {
    const Game g = s.game_mixed(t % 2 == 0);
    const Vector y = s.point(g.size(), 3.0);
    const Matrix lu = inverse(g_jacobian(g, y));
    const Matrix ex = explicit_inverse_jacobian(g, g_slopes(g, y));
    EXPECT_LE(sup_distance(lu, ex), 1e-10);
    EXPECT_LE(inf_op_norm(ex), lipschitz_bound(g) * (1 + 1e-12));
  }
}

TEST(GMap, DimensionMismatch) {
  EXPECT_THROW(g_apply(crra22(), Vector{1.0}), std::invalid_argument);
  EXPECT_THROW(g_invert(crra22(), Vector{1.0, 2.0, 3.0}), std::invalid_argument);
}
