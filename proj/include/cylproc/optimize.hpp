#pragma once

// Maximizing the volume fraction of a d = 3, k = 1 process under a bound on
// the pore-radius variance.
//
// The sufficient condition c_s = E[S] <= 2π √(ε - 1/(πλ)) bounds the mean
// perimeter, and for a fixed perimeter the disc has the largest area, so the
// design variable is a disc radius law with E[R] <= c := √(ε - 1/(πλ)). The
// objective E[A] = π E[R²] is linear in the law. With radii capped at R_max,
// R² <= R_max·R pointwise (equality iff R ∈ {0, R_max}), so E[R²] <= R_max·c
// and the two-point law {0, R_max} attains it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cylproc/analytic.hpp"
#include "cylproc/model.hpp"
#include "cylproc/parallel.hpp"
#include "cylproc/rng.hpp"

namespace cylproc {

struct DesignProblem {
  double lambda;
  double epsilon;  // pore-radius variance budget (length^2)
  double r_max;    // largest manufacturable radius

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("DesignProblem: lambda must be positive");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw std::invalid_argument("DesignProblem: epsilon must be positive");
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw std::invalid_argument("DesignProblem: r_max must be positive");
    if (epsilon < 1.0 / (std::numbers::pi * lambda))
      throw std::invalid_argument("DesignProblem: infeasible, the sufficient condition assumes eps >= 1/(pi*lambda) (" +
                                  std::to_string(epsilon) + " < " +
                                  std::to_string(1.0 / (std::numbers::pi * lambda)) + ")");
  }

  /// Bound on the mean radius: min(√(ε - 1/(πλ)), R_max).
  double mean_radius_bound() const {
    validate();
    return std::min(std::sqrt(epsilon - 1.0 / (std::numbers::pi * lambda)), r_max);
  }
};

struct DesignSolution {
  RadiusLaw radius_law;
  double c = 0.0;  // mean-radius bound
  double q = 0.0;  // probability of radius R_max
  double achieved_mean_area = 0.0;
  double achieved_p = 0.0;
  double var_h = 0.0;  // exact pore-radius variance of the returned law
  bool achieved_var_bound_satisfied = false;
};

struct IsoperimetricResult {
  CrossSection disc;
  double area_gain;
};

/// The disc with the perimeter of K, and how much area it adds.
inline IsoperimetricResult isoperimetric_improvement(const CrossSection& k) {
  if (k.dim() != 2)
    throw std::invalid_argument("isoperimetric_improvement: needs a two-dimensional base, got " + k.name());
  const double s = k.perimeter();
  const double radius = s / (2.0 * std::numbers::pi);
  const double gain = std::max(0.0, std::numbers::pi * radius * radius - k.area());
  return {CrossSection::disc(radius), gain};
}

namespace detail {

inline DesignSolution evaluate_law(const DesignProblem& prob, RadiusLaw law, double c) {
  DesignSolution sol;
  sol.c = c;
  sol.q = 0.0;
  for (const auto& a : law.atoms())
    if (a.radius == prob.r_max) sol.q = a.prob;
  sol.achieved_mean_area = std::numbers::pi * law.second_moment();
  sol.achieved_p = -std::expm1(-prob.lambda * sol.achieved_mean_area);
  sol.var_h = pore_moments(prob.lambda, 2.0 * std::numbers::pi * law.mean()).variance;
  sol.achieved_var_bound_satisfied = sol.var_h <= prob.epsilon;
  sol.radius_law = std::move(law);
  return sol;
}

}  // namespace detail

/// The two-point law {0 w.p. 1 - q, R_max w.p. q}, q = c / R_max.
inline DesignSolution solve_radius_law(const DesignProblem& prob) {
  const double c = prob.mean_radius_bound();
  if (!(c > 0.0))
    throw std::invalid_argument("solve_radius_law: budget forces empty process (eps = 1/(pi*lambda) gives c = 0)");
  const double q = c / prob.r_max;
  RadiusLaw law = q >= 1.0 ? RadiusLaw({{prob.r_max, 1.0}}) : RadiusLaw({{0.0, 1.0 - q}, {prob.r_max, q}});
  return detail::evaluate_law(prob, std::move(law), c);
}

/// E[R] <= c (up to 1e-12) and support inside [0, R_max].
inline bool law_is_feasible(const DesignProblem& prob, const RadiusLaw& law) {
  const double c = prob.mean_radius_bound();
  for (const auto& a : law.atoms())
    if (a.radius > prob.r_max) return false;
  return law.mean() <= c + 1e-12;
}

/// The d = 3, k = 1 isotropic process with disc bases drawn from the law.
inline ProcessSpec design_process(const DesignProblem& prob, const DesignSolution& sol) {
  return ProcessSpec(3, 1, prob.lambda, DirectionalDistribution::isotropic(),
                     BaseDistribution::disc_radius_law(sol.radius_law));
}

/// Random-search certificate: draws n_random feasible laws on the radius grid
/// {0, R_max/200, ..., R_max} (Dirichlet weights, half of them on 1-4 random
/// grid points, mixed with an atom at 0 when E[R] exceeds c) and checks that
/// none beats the solution's E[R²] by more than 1e-9. Also requires the
/// solution itself to be feasible and to meet the variance budget.
inline bool verify_solution(const DesignProblem& prob, const DesignSolution& sol, std::uint64_t n_random,
                            std::uint64_t seed, unsigned workers = 1) {
  if (!law_is_feasible(prob, sol.radius_law)) return false;
  if (!(pore_moments(prob.lambda, 2.0 * std::numbers::pi * sol.radius_law.mean()).variance <= prob.epsilon))
    return false;
  const double c = prob.mean_radius_bound();
  const double best = sol.radius_law.second_moment();
  constexpr int kGrid = 200;
  const auto second = run_replicates(n_random, workers, [&](std::uint64_t i) {
    RandomStream rng(seed, static_cast<std::uint32_t>(i), 0);
    std::vector<double> w(kGrid + 1, 0.0);
    if (i % 2 == 0) {
      for (double& x : w) x = rng.exponential();
    } else {
      const int support = 1 + static_cast<int>(rng.below(4));
      for (int s = 0; s < support; ++s) w[rng.below(kGrid + 1)] += rng.exponential();
    }
    double total = 0.0, m1 = 0.0, m2 = 0.0;
    for (int g = 0; g <= kGrid; ++g) {
      const double r = prob.r_max * g / kGrid;
      total += w[g];
      m1 += w[g] * r;
      m2 += w[g] * r * r;
    }
    m1 /= total;
    m2 /= total;
    // Moving mass to radius 0 scales both moments by the same factor.
    if (m1 > c) m2 *= c / m1;
    return m2;
  });
  for (double m2 : second)
    if (m2 > best + 1e-9) return false;
  return true;
}

}  // namespace cylproc
