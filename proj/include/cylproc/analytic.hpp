#pragma once

// Closed-form characteristics of the union set of a stationary Poisson
// cylinder process: capacity functional on finite point sets, volume
// fraction, covariance and its directional derivative at the origin, linear
// and spherical contact distributions, specific surface area, and the
// pore-radius moments used by the design optimizer.

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cylproc/euclid.hpp"
#include "cylproc/model.hpp"
#include "cylproc/quadrature.hpp"

namespace cylproc {

inline constexpr std::size_t kMaxCapacityPoints = 16;

namespace detail {

// Polar angles (from h, or offsets from h's angle in 2D) at which
// |Pr_L(h)| crosses one of the section diameters.
inline DirectionQuadrature covariogram_hint(const ProcessSpec& spec, Vec3 h) {
  DirectionQuadrature hint;
  const double r = norm(h);
  if (!(r > 0.0)) return hint;
  hint.focus = (1.0 / r) * h;
  const bool line_axis = spec.k() == 1 && spec.d() == 3;
  constexpr double pi = std::numbers::pi;
  if (spec.d() == 2) hint.breaks.push_back(pi / 2);
  for (const auto& atom : spec.base().atoms()) {
    if (atom.section.kind() == CrossSection::Kind::polygon) continue;
    const double diam = atom.section.diameter();
    if (!(diam < r)) continue;
    if (line_axis) {
      hint.breaks.push_back(std::asin(diam / r));
    } else {
      const double t = std::acos(diam / r);
      hint.breaks.push_back(t);
      if (spec.d() == 2) hint.breaks.push_back(pi - t);
    }
  }
  return hint;
}

// exp(z^2) erfc(z) for z >= 0.
inline double erfcx(double z) {
  if (z < 25.0) return std::exp(z * z) * std::erfc(z);
  const double iz2 = 1.0 / (z * z);
  const double series =
      1.0 + iz2 * (-0.5 + iz2 * (0.75 + iz2 * (-1.875 + iz2 * (6.5625 + iz2 * -29.53125))));
  return series / (z * std::sqrt(std::numbers::pi));
}

}  // namespace detail

/// p = 1 - exp(-λ E A).
inline double volume_fraction(const ProcessSpec& spec) {
  return -std::expm1(-spec.lambda() * mean_base_area(spec));
}

/// T(B) for a finite point set B: 1 - exp(-λ E ν(-K ⊕ Pr_L B)).
inline double capacity_finite(const ProcessSpec& spec, std::span<const Vec3> points) {
  if (points.empty()) throw std::invalid_argument("capacity_finite: empty point set");
  if (points.size() > kMaxCapacityPoints)
    throw std::invalid_argument("capacity_finite: at most 16 points are supported");
  const auto& atoms = spec.base().atoms();
  double mean_volume;
  if (points.size() == 1) {
    mean_volume = mean_base_area(spec);
  } else if (points.size() == 2) {
    const Vec3 h = points[1] - points[0];
    mean_volume = spec.expect_over_alpha(detail::covariogram_hint(spec, h), [&](const Subspace& l) {
      const Vec2 t = l.project_along(h);
      double s = 0.0;
      for (const auto& a : atoms) s += a.weight * (2.0 * a.section.area() - a.section.covariogram(t));
      return s;
    });
  } else {
    Vec3 widest{};
    for (const Vec3& p : points)
      for (const Vec3& q : points)
        if (norm(p - q) > norm(widest)) widest = p - q;
    std::vector<CrossSection> reflected;
    for (const auto& a : atoms) reflected.push_back(a.section.reflected());
    mean_volume = spec.expect_over_alpha(detail::covariogram_hint(spec, widest), [&](const Subspace& l) {
      std::vector<Vec2> shifts;
      for (const Vec3& p : points) shifts.push_back(l.project_along(p - points[0]));
      double s = 0.0;
      for (std::size_t i = 0; i < atoms.size(); ++i)
        s += atoms[i].weight * reflected[i].union_of_translates(shifts);
      return s;
    });
  }
  return -std::expm1(-spec.lambda() * mean_volume);
}

/// E_θ[γ_K(Pr_L h)].
inline double mean_covariogram(const ProcessSpec& spec, Vec3 h) {
  const auto& atoms = spec.base().atoms();
  return spec.expect_over_alpha(detail::covariogram_hint(spec, h), [&](const Subspace& l) {
    const Vec2 t = l.project_along(h);
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight * a.section.covariogram(t);
    return s;
  });
}

/// C(h) = P(o ∈ U, h ∈ U).
inline double covariance(const ProcessSpec& spec, Vec3 h) {
  const double lam = spec.lambda();
  const double abar = mean_base_area(spec);
  const double q = std::exp(-lam * abar);
  return 1.0 - 2.0 * q + std::exp(-2.0 * lam * abar + lam * mean_covariogram(spec, h));
}

/// Piecewise closed form of C for the isotropic planar process of strips of
/// width 2a, at lag length r.
inline double covariance_2d_isotropic(double lambda, double a, double r) {
  if (!(lambda > 0.0) || !(a > 0.0) || !(r >= 0.0))
    throw std::invalid_argument("covariance_2d_isotropic: need lambda, a > 0 and r >= 0");
  constexpr double pi = std::numbers::pi;
  const double base = 1.0 - 2.0 * std::exp(-2.0 * lambda * a);
  if (r <= 2.0 * a) return base + std::exp(-2.0 * lambda * a - 2.0 * lambda * r / pi);
  const double s = 2.0 * a / r;
  return base + std::exp(-2.0 * lambda * a -
                         (lambda / pi) * (4.0 * a * std::acos(s) + 2.0 * r * (1.0 - std::sqrt(1.0 - s * s))));
}

namespace detail {

/// E_α E_β[γ'_K(o, u)·[L, h]] with u the unit vector along Pr_{L^⊥} h.
inline double mean_derivative_det(const ProcessSpec& spec, const Direction& h_dir) {
  const auto& atoms = spec.base().atoms();
  const Vec3 h = h_dir.vec();
  DirectionQuadrature hint;
  hint.focus = h;
  if (spec.d() == 2) hint.breaks.push_back(std::numbers::pi / 2);
  return spec.expect_over_alpha(hint, [&](const Subspace& l) {
    const Vec2 t = l.project_along(h);
    const double det = norm(t);
    if (det <= 1e-15) return 0.0;
    const Vec2 u = (1.0 / det) * t;
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight * a.section.covariogram_derivative(u);
    return s * det;
  });
}

}  // namespace detail

/// C'(o, h): one-sided derivative of the covariance at the origin in the unit
/// direction h.
inline double covariance_derivative(const ProcessSpec& spec, const Direction& h_dir) {
  return spec.lambda() * std::exp(-spec.lambda() * mean_base_area(spec)) * detail::mean_derivative_det(spec, h_dir);
}

/// c_{d,k} = ω_{d-k+1} / (2π ω_{d-k}).
inline double linear_contact_constant(int d, int k) {
  return ball_constants(d - k + 1).surface / (2.0 * std::numbers::pi * ball_constants(d - k).surface);
}

/// E_α[[L, η]].
inline double mean_subspace_det(const ProcessSpec& spec, const Direction& eta) {
  DirectionQuadrature hint;
  hint.focus = eta.vec();
  if (spec.d() == 2) hint.breaks.push_back(std::numbers::pi / 2);
  return spec.expect_over_alpha(hint, [&](const Subspace& l) { return subspace_det(l, eta); });
}

/// Rate C_o(η) of the linear contact distribution H_η(r) = 1 - exp(-λ r C_o(η)).
/// Rotation-invariant bases use c_{d,k}·E[S]·E_α[[L, η]]; polygons need the
/// width of K across the projected segment, i.e. -E[γ'_K(u)·[L, η]].
inline double linear_contact_rate(const ProcessSpec& spec, const Direction& eta) {
  if (!spec.base().isotropic_sections()) return -detail::mean_derivative_det(spec, eta);
  return linear_contact_constant(spec.d(), spec.k()) * mean_base_perimeter(spec) * mean_subspace_det(spec, eta);
}

inline double linear_cdf(const ProcessSpec& spec, const Direction& eta, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("linear_cdf: r must be nonnegative");
  return -std::expm1(-spec.lambda() * r * linear_contact_rate(spec, eta));
}

/// H_B(r) for the unit ball B, by the Steiner formula in L^⊥.
inline double spherical_cdf(const ProcessSpec& spec, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("spherical_cdf: r must be nonnegative");
  const int m = spec.d() - spec.k();
  // Intrinsic volumes of K in L^⊥: V_0 = 1, and V_1 = S/2 when m = 2.
  double dilation;
  if (m == 1) {
    dilation = ball_constants(1).volume * r;
  } else {
    dilation = ball_constants(1).volume * r * 0.5 * mean_base_perimeter(spec) + ball_constants(2).volume * r * r;
  }
  return -std::expm1(-spec.lambda() * dilation);
}

namespace detail {

// Haar mean over lines ξ of γ'_K(o, unit Pr_L r_ξ)·[ξ, L], integrated in a
// frame adapted to L (pole along the axis for k = 1, along the normal for
// k = d - 1). The value does not depend on L.
inline double haar_mean_derivative_term(const CrossSection& section, int d, int k) {
  constexpr double pi = std::numbers::pi;
  if (k == d - 1) {
    // Pr_L(r_ξ) = cos θ along the normal, [ξ, L] = |cos θ|, γ' = -1.
    if (d == 2) {
      const double breaks[] = {pi / 2};
      return quad::integrate([&](double t) { return section.covariogram_derivative({1.0, 0.0}) * std::abs(std::cos(t)); },
                             0.0, pi, 129, breaks) / pi;
    }
    return quad::integrate([&](double t) {
      return section.covariogram_derivative({1.0, 0.0}) * std::cos(t) * std::sin(t);
    }, 0.0, pi / 2, 65);
  }
  // d = 3, k = 1: ξ at polar angle θ from the axis, azimuth φ in the L^⊥ frame.
  std::vector<double> breaks;
  if (section.kind() == CrossSection::Kind::polygon) {
    const auto& v = section.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2 e = v[(i + 1) % v.size()] - v[i];
      double a = std::atan2(e.v, e.u);
      for (int m = -2; m <= 2; ++m) breaks.push_back(a + m * pi);
    }
  }
  const double phi_mean = quad::integrate([&](double phi) {
    return section.covariogram_derivative({std::cos(phi), std::sin(phi)});
  }, 0.0, 2.0 * pi, 65, breaks) / (2.0 * pi);
  const double theta_mean = quad::integrate([](double t) { return std::sin(t) * std::sin(t); }, 0.0, pi / 2, 65);
  return phi_mean * theta_mean;
}

}  // namespace detail

/// Specific surface area of the union set, through the covariance-derivative
/// representation and the Crofton constant d κ_d / κ_{d-1}.
inline double specific_surface(const ProcessSpec& spec) {
  double e = 0.0;
  for (const auto& a : spec.base().atoms())
    e += a.weight * detail::haar_mean_derivative_term(a.section, spec.d(), spec.k());
  return -spec.lambda() * crofton_constant(spec.d()) * e * std::exp(-spec.lambda() * mean_base_area(spec));
}

/// Closed forms of the specific surface area: 2λ exp(-λ E A) for k = d - 1
/// and λ E S(K) exp(-λ E A) for d = 3, k = 1 (2πaλ exp(-λπa²) for discs).
inline double specific_surface_closed_form(const ProcessSpec& spec) {
  const double decay = std::exp(-spec.lambda() * mean_base_area(spec));
  if (spec.k() == spec.d() - 1) return 2.0 * spec.lambda() * decay;
  return spec.lambda() * mean_base_perimeter(spec) * decay;
}

struct PoreMoments {
  double mean;
  double second_moment;
  double variance;
};

/// Moments of the pore radius H with distribution 1 - exp(-λ(r c_s + π r²)).
inline PoreMoments pore_moments(double lambda, double c_s) {
  if (!(lambda > 0.0)) throw std::invalid_argument("pore_moments: lambda must be positive");
  if (!(c_s >= 0.0)) throw std::invalid_argument("pore_moments: c_s must be nonnegative");
  constexpr double pi = std::numbers::pi;
  // c_e c_Φ = exp(x²/2) (1 - Φ(x)) with x = c_s sqrt(λ / 2π).
  const double x = c_s * std::sqrt(lambda / (2.0 * pi));
  const double ce_cphi = 0.5 * detail::erfcx(x / std::numbers::sqrt2);
  const double mean = ce_cphi / std::sqrt(lambda);
  const double second = 1.0 / (pi * lambda) - ce_cphi * c_s / (pi * std::sqrt(lambda));
  return {mean, second, second - mean * mean};
}

/// Largest mean perimeter c_s allowed by the sufficient condition for
/// Var H <= ε: 2π sqrt(ε - 1/(πλ)).
inline double variance_bound_cs(double lambda, double eps) {
  if (!(lambda > 0.0)) throw std::invalid_argument("variance_bound_cs: lambda must be positive");
  const double floor = 1.0 / (std::numbers::pi * lambda);
  if (!(eps >= floor))
    throw std::invalid_argument("variance budget violates the standing assumption eps >= 1/(pi*lambda) = " +
                                std::to_string(floor));
  return 2.0 * std::numbers::pi * std::sqrt(eps - floor);
}

}  // namespace cylproc
