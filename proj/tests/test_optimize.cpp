#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cylproc/analytic.hpp"
#include "cylproc/optimize.hpp"

using namespace cylproc;
constexpr double pi = std::numbers::pi;

namespace {

// Best Σ q_i r_i² over laws on the grid {0, h, ..., r_max} with Σ q_i r_i <= c.
// The LP optimum sits on a vertex with at most two support points, so
// enumerating pairs (and singletons) is exhaustive.
double lp_oracle(double c, double r_max, int steps) {
  std::vector<double> r;
  for (int i = 0; i <= steps; ++i) r.push_back(r_max * i / steps);
  double best = 0.0;
  for (double a : r)
    if (a <= c) best = std::max(best, a * a);
  for (double a : r) {
    if (a > c) continue;
    for (double b : r) {
      if (b <= c) continue;
      const double w = (c - a) / (b - a);  // mass on b, mean exactly c
      best = std::max(best, (1 - w) * a * a + w * b * b);
    }
  }
  return best;
}

}  // namespace

TEST(Isoperimetric, DiscIsOptimal) {
  EXPECT_NEAR(isoperimetric_improvement(CrossSection::disc(1.7)).area_gain, 0.0, 1e-12);
}

TEST(Isoperimetric, PolygonsGainArea) {
  const auto square = CrossSection::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const auto res = isoperimetric_improvement(square);
  EXPECT_NEAR(res.area_gain, 4 / pi - 1, 1e-12);
  EXPECT_NEAR(res.disc.perimeter(), 4.0, 1e-12);
  std::vector<Vec2> hex;
  for (int i = 0; i < 6; ++i) hex.push_back({std::cos(i * pi / 3), std::sin(i * pi / 3)});
  // relative gain shrinks as the polygon gets rounder
  const auto h = CrossSection::polygon(hex);
  EXPECT_LT(isoperimetric_improvement(h).area_gain / h.area(), res.area_gain / square.area());
  EXPECT_GT(isoperimetric_improvement(h).area_gain, 0.0);
  EXPECT_THROW(isoperimetric_improvement(CrossSection::segment(1)), std::invalid_argument);
}

TEST(Design, ReferenceProblem) {
  const DesignProblem prob{0.1, 4.0, 2.0};
  const auto sol = solve_radius_law(prob);
  const double c = std::sqrt(4.0 - 1 / (0.1 * pi));
  EXPECT_NEAR(sol.c, c, 1e-15);
  EXPECT_NEAR(sol.q, c / 2, 1e-9);
  EXPECT_NEAR(sol.q, 0.45191, 1e-5);
  EXPECT_NEAR(sol.radius_law.second_moment(), 2.0 * sol.c, 1e-12);
  EXPECT_NEAR(sol.achieved_mean_area, pi * 2.0 * c, 1e-12);
  EXPECT_NEAR(sol.achieved_p, 1 - std::exp(-0.1 * pi * 2.0 * c), 1e-15);
  EXPECT_NEAR(sol.achieved_p, 0.433280, 1e-6);
  EXPECT_TRUE(sol.achieved_var_bound_satisfied);
  EXPECT_LE(sol.var_h, 4.0);
  ASSERT_EQ(sol.radius_law.atoms().size(), 2u);
}

TEST(Design, MatchesLpOracle) {
  for (const DesignProblem& prob : {DesignProblem{0.1, 4.0, 2.0}, DesignProblem{0.5, 1.0, 1.0}, DesignProblem{0.05, 7.0, 1.3}}) {
    const auto sol = solve_radius_law(prob);
    const double oracle = lp_oracle(sol.c, prob.r_max, 200);
    EXPECT_NEAR(sol.radius_law.second_moment(), oracle, 1e-6);
    EXPECT_GE(sol.radius_law.second_moment(), oracle - 1e-12);
  }
}

TEST(Design, VerifyAcceptsOptimumAndRejectsWorse) {
  const DesignProblem prob{0.1, 4.0, 2.0};
  const auto sol = solve_radius_law(prob);
  EXPECT_TRUE(verify_solution(prob, sol, 1000, 1));
  EXPECT_EQ(verify_solution(prob, sol, 200, 1, 1), verify_solution(prob, sol, 200, 1, 3));
  // move 10% of the R_max mass to R_max/2: feasible, strictly worse, fails verification
  const double q = sol.q;
  const RadiusLaw worse({{0.0, 1 - q}, {1.0, 0.1 * q}, {2.0, 0.9 * q}});
  EXPECT_LT(worse.second_moment(), sol.radius_law.second_moment());
  EXPECT_TRUE(law_is_feasible(prob, worse));
  auto bad = sol;
  bad.radius_law = worse;
  EXPECT_FALSE(verify_solution(prob, bad, 1000, 1));
  EXPECT_FALSE(law_is_feasible(prob, RadiusLaw({{2.0, 1.0}})));
  EXPECT_FALSE(law_is_feasible(prob, RadiusLaw({{0.0, 0.5}, {2.5, 0.5}})));
}

TEST(Design, GridSatisfiesVarianceBudget) {
  for (double lambda : {0.05, 0.1, 0.5}) {
    for (double f : {1.05, 1.5, 3.0}) {
      for (double r_max : {0.5, 1.0, 2.0}) {
        const DesignProblem prob{lambda, f / (pi * lambda), r_max};
        const auto sol = solve_radius_law(prob);
        const double var = pore_moments(lambda, 2 * pi * sol.radius_law.mean()).variance;
        EXPECT_LE(var, prob.epsilon) << lambda << " " << f << " " << r_max;
        EXPECT_TRUE(sol.achieved_var_bound_satisfied);
        EXPECT_LE(sol.radius_law.mean(), std::sqrt(prob.epsilon - 1 / (pi * lambda)) + 1e-12);
        EXPECT_LE(sol.radius_law.max_radius(), r_max);
        EXPECT_NEAR(sol.radius_law.second_moment(), r_max * sol.c, 1e-12);
      }
    }
  }
}

TEST(Design, EdgeCases) {
  EXPECT_THROW(solve_radius_law({0.1, 1 / (0.1 * pi), 2.0}), std::invalid_argument);
  EXPECT_THROW(solve_radius_law({0.1, 0.5 / (0.1 * pi), 2.0}), std::invalid_argument);
  EXPECT_THROW(solve_radius_law({0.0, 4.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(solve_radius_law({0.1, 4.0, -1.0}), std::invalid_argument);
  // radius cap below the budget: constraint slack, deterministic radius R_max
  const auto sol = solve_radius_law({0.1, 4.0, 0.5});
  EXPECT_DOUBLE_EQ(sol.q, 1.0);
  ASSERT_EQ(sol.radius_law.atoms().size(), 1u);
  EXPECT_DOUBLE_EQ(sol.radius_law.atoms()[0].radius, 0.5);
}

TEST(Design, ProcessUsesTheLaw) {
  const DesignProblem prob{0.1, 4.0, 2.0};
  const auto sol = solve_radius_law(prob);
  const auto spec = design_process(prob, sol);
  EXPECT_EQ(spec.d(), 3);
  EXPECT_EQ(spec.k(), 1);
  EXPECT_NEAR(volume_fraction(spec), sol.achieved_p, 1e-15);
}
