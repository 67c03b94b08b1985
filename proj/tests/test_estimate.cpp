#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "cylproc/analytic.hpp"
#include "cylproc/estimate.hpp"

using namespace cylproc;

namespace {

ProcessSpec discs3d(double lambda = 0.1, double a = 1.0) {
  return ProcessSpec(3, 1, lambda, DirectionalDistribution::isotropic(),
                     BaseDistribution::deterministic(CrossSection::disc(a)));
}

ProcessSpec strips2d(double lambda = 0.2, double a = 0.5) {
  return ProcessSpec(2, 1, lambda, DirectionalDistribution::isotropic(),
                     BaseDistribution::deterministic(CrossSection::segment(a)));
}

RunOptions opts(std::uint64_t reps, std::uint64_t seed, unsigned workers = 1) { return {reps, seed, workers}; }

void expect_agrees(const EstimateReport& r, double zmax = 4.0) {
  ASSERT_TRUE(r.z_score) << r.name;
  EXPECT_LT(std::abs(*r.z_score), zmax) << r.name << " est=" << r.estimate << " analytic=" << *r.analytic
                                        << " se=" << r.std_error;
}

void expect_same(const EstimateReport& a, const EstimateReport& b) {
  EXPECT_EQ(a.name, b.name);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
}

}  // namespace

TEST(Summarize, MeanStdErrorAndZ) {
  const auto r = summarize("x", {1.0, 2.0, 3.0, 4.0}, 10, 5, 2.0);
  EXPECT_DOUBLE_EQ(r.estimate, 2.5);
  EXPECT_NEAR(r.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_NEAR(*r.z_score, 0.5 / r.std_error, 1e-12);
  EXPECT_EQ(*summarize("y", {0.0, 0.0}, 1, 0, 0.0).z_score, 0.0);
  EXPECT_EQ(*summarize("y", {1.0, 1.0}, 1, 0, 0.0).z_score, INFINITY);
  EXPECT_FALSE(summarize("y", {1.0}, 1, 0, std::nullopt).z_score);
}

// Contact distributions pool replicates as Σ num / Σ den, so a realization
// with little uncovered volume carries little weight.
TEST(Summarize, PooledRatios) {
  const std::vector<detail::RatioSample> reps{{{0.1}, 0.2}, {{0.3}, 0.6}, {{0.0}, 0.0}};
  const auto r = detail::summarize_ratios({"h"}, reps, 7, 1, {0.5})[0];
  EXPECT_DOUBLE_EQ(r.estimate, 0.5);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_EQ(*r.z_score, 0.0);
  EXPECT_EQ(r.n_replicates, 3u);
  const auto u = detail::summarize_ratios({"h"}, {{{0.1}, 0.5}, {{0.3}, 0.5}}, 1, 1, {0.4})[0];
  EXPECT_DOUBLE_EQ(u.estimate, 0.4);
  // equal denominators: the plain replicate standard error of num/den
  EXPECT_NEAR(u.std_error, summarize("x", {0.2, 0.6}, 1, 1, {}).std_error, 1e-15);
  EXPECT_THROW(detail::summarize_ratios({"h"}, {{{0.0}, 0.0}}, 1, 1, {0.0}), std::runtime_error);
}

TEST(Estimators, EmptyProcessGivesExactZeros) {
  const auto spec = discs3d(0.0);
  const auto w = Window::cube(3, 0, 8);
  const auto vf = est_volume_fraction(spec, w, 500, opts(3, 1));
  EXPECT_EQ(vf.estimate, 0.0);
  EXPECT_EQ(*vf.z_score, 0.0);
  EXPECT_EQ(est_covariance(spec, w, {{0.5, 0, 0}}, 500, opts(3, 1))[0].estimate, 0.0);
  EXPECT_EQ(est_linear_cdf(spec, w, {1, 0, 0}, {1.0}, 200, opts(3, 1))[0].estimate, 0.0);
  EXPECT_EQ(est_specific_surface_linescan(spec, w, 200, opts(3, 1)).estimate, 0.0);
}

TEST(Estimators, VolumeFractionAgrees) {
  expect_agrees(est_volume_fraction(discs3d(), Window::cube(3, 0, 15), 4000, opts(20, 3)));
  expect_agrees(est_volume_fraction(strips2d(), Window::cube(2, 0, 20), 4000, opts(20, 3)));
}

TEST(Estimators, CovarianceZeroLagIsVolumeFraction) {
  const auto spec = discs3d();
  const auto w = Window::cube(3, 0, 12);
  const auto vf = est_volume_fraction(spec, w, 3000, opts(5, 8));
  const auto cov = est_covariance(spec, w, {{0, 0, 0}, {0.6, 0.3, 0}, {0, 0, 2.0}}, 3000, opts(5, 8));
  EXPECT_EQ(cov[0].estimate, vf.estimate);
  EXPECT_EQ(cov[0].name, "covariance@h=(0 0 0)");
  EXPECT_EQ(cov[1].name, "covariance@h=(0.6 0.3 0)");
  EXPECT_THROW(est_covariance(spec, w, {{3.5, 0, 0}}, 10, opts(1, 1)), std::invalid_argument);
}

TEST(Estimators, PlanarCovarianceAgrees) {
  const auto spec = ProcessSpec(2, 1, 0.1, DirectionalDistribution::isotropic(),
                                BaseDistribution::deterministic(CrossSection::segment(1.0)));
  const auto cov = est_covariance(spec, Window::cube(2, 0, 30), {{0.5, 0, 0}, {0, 2, 0}, {2.4, 3.2, 0}}, 4000,
                                  opts(30, 4));
  for (const auto& r : cov) {
    expect_agrees(r);
    const double len = r.name == "covariance@h=(0.5 0)" ? 0.5 : r.name == "covariance@h=(0 2)" ? 2.0 : 4.0;
    EXPECT_NEAR(*r.analytic, covariance_2d_isotropic(0.1, 1.0, len), 1e-10) << r.name;
  }
}

TEST(Estimators, SphericalCdfMonotoneAndAgrees) {
  const auto spec = discs3d();
  const auto reps = est_spherical_cdf(spec, Window::cube(3, 0, 12), {0.0, 0.25, 0.5, 1.0}, 1500, opts(20, 5));
  EXPECT_EQ(reps[0].estimate, 0.0);
  for (std::size_t i = 1; i < reps.size(); ++i) {
    EXPECT_GE(reps[i].estimate, reps[i - 1].estimate);
    expect_agrees(reps[i]);
  }
  EXPECT_THROW(est_spherical_cdf(spec, Window::cube(3, 0, 12), {3.5}, 10, opts(1, 1)), std::invalid_argument);
}

// In the plane the spherical contact distribution does not see the strip width.
TEST(Estimators, PlanarSphericalCdfIgnoresSegmentLength) {
  for (double a : {0.1, 5.0}) {
    const auto spec = strips2d(0.1, a);
    const auto reps = est_spherical_cdf(spec, Window::cube(2, 0, 40), {0.5, 1.0}, 1500, opts(20, 6));
    for (const auto& r : reps) {
      expect_agrees(r);
      EXPECT_NEAR(*r.analytic, 1 - std::exp(-0.2 * (r.name == "spherical_cdf@r=0.5" ? 0.5 : 1.0)), 1e-15);
    }
  }
}

TEST(Estimators, LinearCdfAgreesAndRespectsAxes) {
  const auto spec = discs3d();
  const auto reps =
      est_linear_cdf(spec, Window::cube(3, 0, 12), Direction::from({1, 2, 2}, 3).vec(), {0.5, 1.0, 2.0}, 1500,
                     opts(20, 7));
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (i > 0) {
      EXPECT_GE(reps[i].estimate, reps[i - 1].estimate);
    }
    expect_agrees(reps[i]);
  }
  const auto axis = Direction::from({0, 0, 1}, 3);
  const ProcessSpec rods(3, 1, 0.1, DirectionalDistribution::fixed_axis(axis),
                         BaseDistribution::deterministic(CrossSection::disc(1.0)));
  const auto par = est_linear_cdf(rods, Window::cube(3, 0, 12), {0, 0, 1}, {1.0}, 1000, opts(5, 8));
  EXPECT_EQ(par[0].estimate, 0.0);
  const auto perp = est_linear_cdf(rods, Window::cube(3, 0, 12), {1, 0, 0}, {1.0}, 1000, opts(20, 8));
  expect_agrees(perp[0]);
  EXPECT_THROW(est_linear_cdf(spec, Window::cube(3, 0, 12), {2, 0, 0}, {1.0}, 10, opts(1, 1)),
               std::invalid_argument);
}

TEST(Estimators, PlanarLinearCdfIgnoresSegmentLength) {
  for (double a : {0.2, 2.0}) {
    const auto r = est_linear_cdf(strips2d(0.1, a), Window::cube(2, 0, 40), {0.6, 0.8, 0}, {1.5}, 1500,
                                  opts(20, 9))[0];
    expect_agrees(r);
    EXPECT_NEAR(*r.analytic, 1 - std::exp(-0.1 * 1.5 * 2 / std::numbers::pi), 1e-12);
  }
}

TEST(Estimators, SpecificSurfaceLinescanAgrees) {
  expect_agrees(est_specific_surface_linescan(discs3d(), Window::cube(3, 0, 15), 3000, opts(20, 10)));
  expect_agrees(est_specific_surface_linescan(strips2d(), Window::cube(2, 0, 25), 3000, opts(20, 10)));
}

// Flat fibres: the surface density is 2λe^{-λ E|K|} whatever the orientation law.
TEST(Estimators, FlatSurfaceIndependentOfAxes) {
  const auto seg = BaseDistribution::deterministic(CrossSection::segment(0.5));
  const ProcessSpec a(2, 1, 0.2, DirectionalDistribution::fixed_axis(Direction::from({1, 0, 0}, 2)), seg);
  const ProcessSpec b(2, 1, 0.2,
                      DirectionalDistribution::fixed_axes({{Direction::from({1, 1, 0}, 2), 0.3},
                                                           {Direction::from({-1, 3, 0}, 2), 0.7}}),
                      seg);
  const auto ra = est_specific_surface_linescan(a, Window::cube(2, 0, 25), 3000, opts(20, 11));
  const auto rb = est_specific_surface_linescan(b, Window::cube(2, 0, 25), 3000, opts(20, 11));
  expect_agrees(ra);
  expect_agrees(rb);
  EXPECT_EQ(*ra.analytic, *rb.analytic);
  EXPECT_LT(std::abs(ra.estimate - rb.estimate), 4 * std::hypot(ra.std_error, rb.std_error));
}

TEST(Estimators, SpecificSurfaceCovDerivWithinBias) {
  const auto spec = discs3d();
  const auto r = est_specific_surface_covderiv(spec, Window::cube(3, 0, 12), 0.02, 10, 2000, opts(10, 12));
  EXPECT_NEAR(r.estimate, *r.analytic, 0.1 * *r.analytic);
  const auto rr = est_specific_surface_covderiv(spec, Window::cube(3, 0, 12), 0.02, 10, 2000, opts(10, 12), true);
  EXPECT_EQ(rr.name, "specific_surface_covderiv_richardson");
  EXPECT_THROW(est_specific_surface_covderiv(spec, Window::cube(3, 0, 12), 0.0, 1, 1, opts(1, 1)),
               std::invalid_argument);
}

TEST(Estimators, DeterministicAcrossWorkerCounts) {
  const auto spec = discs3d();
  const auto w = Window::cube(3, 0, 10);
  expect_same(est_volume_fraction(spec, w, 500, opts(6, 13, 1)), est_volume_fraction(spec, w, 500, opts(6, 13, 4)));
  expect_same(est_spherical_cdf(spec, w, {0.5}, 300, opts(6, 13, 1))[0],
              est_spherical_cdf(spec, w, {0.5}, 300, opts(6, 13, 4))[0]);
  expect_same(est_linear_cdf(spec, w, {0, 1, 0}, {1.0}, 300, opts(6, 13, 1))[0],
              est_linear_cdf(spec, w, {0, 1, 0}, {1.0}, 300, opts(6, 13, 3))[0]);
  expect_same(est_specific_surface_linescan(spec, w, 300, opts(6, 13, 1)),
              est_specific_surface_linescan(spec, w, 300, opts(6, 13, 4)));
  expect_same(est_specific_surface_covderiv(spec, w, 0.05, 3, 200, opts(6, 13, 1)),
              est_specific_surface_covderiv(spec, w, 0.05, 3, 200, opts(6, 13, 2)));
}

TEST(Estimators, RejectsDenseProcessesAndBadCounts) {
  const auto dense = discs3d(5.0, 1.0);
  EXPECT_THROW(est_spherical_cdf(dense, Window::cube(3, 0, 8), {0.5}, 10, opts(1, 1)), std::invalid_argument);
  EXPECT_THROW(est_volume_fraction(discs3d(), Window::cube(3, 0, 8), 0, opts(1, 1)), std::invalid_argument);
  EXPECT_THROW(est_volume_fraction(discs3d(), Window::cube(3, 0, 8), 10, opts(0, 1)), std::invalid_argument);
}

TEST(ReportCsv, Format) {
  std::ostringstream os;
  write_reports_csv(os, {summarize("volume_fraction", {0.25, 0.5}, 100, 3, 1.0 / 3), summarize("x", {1.0}, 1, 0, {})});
  EXPECT_EQ(os.str(),
            "name,estimate,std_error,n_samples,n_replicates,seed,analytic,z_score\n"
            "volume_fraction,0.375,0.125,100,2,3,0.333333333333,0.333333333333\n"
            "x,1,0,1,1,0,,\n");
}
