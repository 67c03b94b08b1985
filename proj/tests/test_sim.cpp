#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "cylproc/analytic.hpp"
#include "cylproc/planar.hpp"
#include "cylproc/sim.hpp"

using namespace cylproc;
constexpr double pi = std::numbers::pi;

namespace {

ProcessSpec discs3d(double lambda = 0.1, double a = 1.0) {
  return ProcessSpec(3, 1, lambda, DirectionalDistribution::isotropic(),
                     BaseDistribution::deterministic(CrossSection::disc(a)));
}

ProcessSpec strips2d(double lambda = 0.2, double a = 0.5) {
  return ProcessSpec(2, 1, lambda, DirectionalDistribution::isotropic(),
                     BaseDistribution::deterministic(CrossSection::segment(a)));
}

ProcessSpec square_prisms() {
  const auto law = DirectionalDistribution::fixed_axes({{Direction::from({0, 0, 1}, 3), 0.5},
                                                        {Direction::from({1, 1, 0.3}, 3), 0.5}});
  return ProcessSpec(3, 1, 0.15, law,
                     BaseDistribution::deterministic(CrossSection::polygon({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}})));
}

ProcessSpec slabs() {
  return ProcessSpec(3, 2, 0.3, DirectionalDistribution::isotropic(),
                     BaseDistribution::deterministic(CrossSection::segment(0.3)));
}

// One disc cylinder of radius 1 along e3 through the origin.
Realization single_rod() {
  const auto spec = discs3d();
  const auto axis = Direction::from({0, 0, 1}, 3);
  PlacedCylinder c{spec.subspace_for(axis), CrossSection::disc(1.0), {0, 0}};
  return Realization(spec, Window::cube(3, -10, 10), 0, {c});
}

std::string to_csv(const Realization& r) {
  std::ostringstream os;
  write_realization_csv(os, r);
  return os.str();
}

}  // namespace

TEST(Window, Basics) {
  const Window w(3, {0, 1, 2}, {4, 3, 3});
  EXPECT_DOUBLE_EQ(w.volume(), 8.0);
  EXPECT_DOUBLE_EQ(w.min_side(), 1.0);
  EXPECT_EQ(w.corners().size(), 8u);
  EXPECT_TRUE(w.contains({4, 3, 3}));
  EXPECT_FALSE(w.contains({4.1, 3, 3}));
  const Window e = w.eroded(0.25);
  EXPECT_DOUBLE_EQ(e.lo().z, 2.25);
  EXPECT_THROW(w.eroded(0.5), std::invalid_argument);
  EXPECT_THROW(Window(3, {0, 0, 0}, {1, 1, 0}), std::invalid_argument);
  const Window sq = Window::cube(2, 0, 2);
  EXPECT_EQ(sq.corners().size(), 4u);
  EXPECT_DOUBLE_EQ(sq.volume(), 4.0);
  const auto t = sq.clip_line({1, 1, 0}, {1, 0, 0});
  ASSERT_TRUE(t);
  EXPECT_DOUBLE_EQ(t->first, -1.0);
  EXPECT_DOUBLE_EQ(t->second, 1.0);
  EXPECT_FALSE(sq.clip_line({1, 3, 0}, {1, 0, 0}));
}

TEST(Realization, SingleRodQueries) {
  const auto r = single_rod();
  EXPECT_TRUE(r.contains({0.5, 0, 7}));
  EXPECT_FALSE(r.contains({1.5, 0, 7}));
  EXPECT_DOUBLE_EQ(r.distance_to_union({3, 0, 0}), 2.0);
  EXPECT_DOUBLE_EQ(r.distance_to_union({0.2, 0.1, -3}), 0.0);
  const auto iv = r.ray_intervals({-5, 0, 0}, Vec3{1, 0, 0}, 10.0);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_NEAR(iv[0].first, 4.0, 1e-12);
  EXPECT_NEAR(iv[0].second, 6.0, 1e-12);
  // parallel to the axis and outside: no interval
  EXPECT_TRUE(r.ray_intervals({2, 0, -5}, Vec3{0, 0, 1}, 10.0).empty());
  // parallel and inside: the whole segment
  const auto in = r.ray_intervals({0.5, 0, -5}, Vec3{0, 0, 1}, 10.0);
  ASSERT_EQ(in.size(), 1u);
  EXPECT_NEAR(in[0].second - in[0].first, 10.0, 1e-12);
  EXPECT_TRUE(r.ray_hits({-5, 0, 0}, {1, 0, 0}, 4.5));
  EXPECT_FALSE(r.ray_hits({-5, 0, 0}, {1, 0, 0}, 3.5));
  EXPECT_THROW(r.contains({11, 0, 0}), std::domain_error);
  EXPECT_THROW(r.ray_intervals({-5, 0, 0}, Vec3{1, 0, 0}, 20.0), std::domain_error);
  EXPECT_THROW(r.ray_intervals({-5, 0, 0}, Vec3{2, 0, 0}, 1.0), std::invalid_argument);
}

TEST(Realization, MergeIntervals) {
  const auto m = Realization::merge({{3, 4}, {0, 1}, {0.5, 2}, {2, 2.5}, {5, 6}});
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0], (Interval{0, 2.5}));
  EXPECT_EQ(m[1], (Interval{3, 4}));
  EXPECT_EQ(m[2], (Interval{5, 6}));
}

TEST(Sampling, EmptyProcess) {
  const auto r = sample_realization(discs3d(0.0), Window::cube(3, 0, 10), 1);
  EXPECT_EQ(r.size(), 0u);
  EXPECT_FALSE(r.contains({5, 5, 5}));
  EXPECT_EQ(r.distance_to_union({5, 5, 5}), INFINITY);
  EXPECT_TRUE(r.ray_intervals({1, 1, 1}, Vec3{1, 0, 0}, 5).empty());
}

TEST(Sampling, DeterministicPerSeedAndStream) {
  const auto spec = discs3d();
  const auto w = Window::cube(3, 0, 15);
  const auto a = sample_realization(spec, w, 99, 3);
  const auto b = sample_realization(spec, w, 99, 3);
  const auto c = sample_realization(spec, w, 99, 4);
  EXPECT_GT(a.size(), 0u);
  EXPECT_EQ(to_csv(a), to_csv(b));
  EXPECT_NE(to_csv(a), to_csv(c));
}

// Expected number of retained cylinders is λ E_θ ν((Pr W) ⊕ K̆); for discs
// the Steiner formula gives area + a·perimeter + πa² of the projected window.
TEST(Sampling, RetainedCountMatchesHittingMeasure) {
  const double lambda = 0.1, a = 1.0;
  const auto spec = discs3d(lambda, a);
  const auto w = Window::cube(3, 0, 20);
  const auto corners = w.corners();
  DirectionQuadrature hint;
  const double hit = spec.expect_over_alpha(hint, [&](const Subspace& l) {
    std::vector<Vec2> p;
    for (const Vec3& c : corners) p.push_back(l.project_along(c));
    const auto hull = planar::convex_hull(p);
    return planar::signed_area(hull) + a * planar::perimeter(hull) + pi * a * a;
  });
  const double expected = lambda * hit;
  const int n = 400;
  double s = 0;
  for (int i = 0; i < n; ++i) s += static_cast<double>(sample_realization(spec, w, 7, i).size());
  const double mean = s / n;
  EXPECT_NEAR(mean, expected, 4 * std::sqrt(expected / n)) << "expected " << expected;
}

// P(finite set hit) from sampling against the analytic capacity functional.
TEST(Sampling, CapacityFunctionalOfPointTriples) {
  struct Case {
    ProcessSpec spec;
    Window window;
    std::vector<Vec3> pts;
  };
  const std::vector<Case> cases{
      {discs3d(0.1, 1.0), Window::cube(3, 0, 6), {{3, 3, 3}, {4.2, 3, 3.5}, {2.5, 4, 2}}},
      {strips2d(), Window::cube(2, 0, 6), {{3, 3, 0}, {4, 3.5, 0}, {2.2, 2.2, 0}}},
      {square_prisms(), Window::cube(3, 0, 6), {{3, 3, 3}, {4, 3.5, 2.5}, {2, 3, 4}}},
      {slabs(), Window::cube(3, 0, 6), {{3, 3, 3}, {3.8, 3, 3.2}, {3, 2.1, 3.9}}},
  };
  const int n = 4000;
  for (const auto& c : cases) {
    int hit_any = 0, hit_both = 0;
    for (int i = 0; i < n; ++i) {
      const auto r = sample_realization(c.spec, c.window, 11, i);
      const bool h0 = r.contains(c.pts[0]), h1 = r.contains(c.pts[1]), h2 = r.contains(c.pts[2]);
      hit_any += h0 || h1 || h2;
      hit_both += h0 && h1;
    }
    const double t = capacity_finite(c.spec, c.pts);
    const double cov = covariance(c.spec, c.pts[1] - c.pts[0]);
    EXPECT_NEAR(hit_any / double(n), t, 4 * std::sqrt(t * (1 - t) / n)) << "d=" << c.spec.d() << " k=" << c.spec.k();
    EXPECT_NEAR(hit_both / double(n), cov, 4 * std::sqrt(cov * (1 - cov) / n)) << "d=" << c.spec.d();
  }
}

TEST(Sampling, ContainsIffZeroDistance) {
  for (const auto& spec : {discs3d(0.2), strips2d(), square_prisms(), slabs()}) {
    const auto w = Window::cube(spec.d(), 0, 8);
    const auto r = sample_realization(spec, w, 5);
    RandomStream rng(5, 0, 9);
    for (int i = 0; i < 2000; ++i) {
      const Vec3 x = w.uniform_point(rng);
      const double dist = r.distance_to_union(x);
      EXPECT_EQ(r.contains(x), dist <= 1e-12) << "d=" << spec.d();
      EXPECT_GE(dist, 0.0);
    }
  }
}

TEST(Sampling, RayCoverageMatchesVolumeFraction) {
  const auto spec = discs3d(0.1, 1.0);
  const auto w = Window::cube(3, 0, 20);
  const auto eta = Direction::from({0.3, 0.4, 0.8}, 3).vec();
  std::vector<double> fr;
  for (int i = 0; i < 40; ++i) {
    const auto r = sample_realization(spec, w, 21, i);
    RandomStream rng(21, i, 1);
    double covered = 0, total = 0;
    for (int j = 0; j < 200; ++j) {
      const Vec3 o{rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 5)};
      for (const auto& [a, b] : r.ray_intervals(o, eta, 10.0)) covered += b - a;
      total += 10.0;
    }
    fr.push_back(covered / total);
  }
  double m = 0, v = 0;
  for (double f : fr) m += f;
  m /= fr.size();
  for (double f : fr) v += (f - m) * (f - m);
  const double se = std::sqrt(v / (fr.size() - 1) / fr.size());
  EXPECT_NEAR(m, volume_fraction(spec), 4 * se);
}

TEST(RealizationCsv, RoundTripPreservesQueries) {
  for (const auto& spec : {discs3d(0.2), strips2d(), square_prisms(), slabs()}) {
    const auto w = Window::cube(spec.d(), 0, 8);
    const auto r = sample_realization(spec, w, 17);
    const std::string text = to_csv(r);
    std::istringstream is(text);
    const auto back = read_realization_csv(is, spec, w, 17);
    ASSERT_EQ(back.size(), r.size());
    EXPECT_EQ(to_csv(back), text);
    RandomStream rng(17, 0, 5);
    for (int i = 0; i < 500; ++i) {
      const Vec3 x = w.uniform_point(rng);
      EXPECT_EQ(back.contains(x), r.contains(x));
      EXPECT_EQ(back.distance_to_union(x), r.distance_to_union(x));
    }
  }
}

TEST(RealizationCsv, RejectsMalformedInput) {
  const auto spec = discs3d();
  const auto w = Window::cube(3, 0, 5);
  std::istringstream bad_header("id,x\n");
  EXPECT_THROW(read_realization_csv(bad_header, spec, w, 0), std::invalid_argument);
  std::istringstream bad_num(realization_csv_header(3) + "\n0,0,0,1,0.5,x,disc,1\n");
  EXPECT_THROW(read_realization_csv(bad_num, spec, w, 0), std::invalid_argument);
  std::istringstream bad_shape(realization_csv_header(3) + "\n0,0,0,1,0.5,0,segment,1\n");
  EXPECT_THROW(read_realization_csv(bad_shape, spec, w, 0), std::invalid_argument);
}
