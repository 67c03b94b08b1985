#pragma once

// Stationary Poisson cylinder process descriptions.
//
// The shape distribution is the product of a directional law α on G(k, d) and
// a base law independent of direction. For k = 1 in R^3 the directional law is
// a law on the spanning direction of the cylinder axis; for k = d - 1 it is a
// law on the unit normal of the direction space.

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cylproc/euclid.hpp"
#include "cylproc/quadrature.hpp"
#include "cylproc/rng.hpp"

namespace cylproc {

/// Discrete law of a disc radius.
class RadiusLaw {
 public:
  struct Atom {
    double radius;
    double prob;
  };

  RadiusLaw() = default;

  explicit RadiusLaw(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("RadiusLaw: empty support");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& a = atoms_[i];
      if (!(a.radius >= 0.0) || !std::isfinite(a.radius))
        throw std::invalid_argument("RadiusLaw: radii must be finite and nonnegative");
      if (!(a.prob > 0.0)) throw std::invalid_argument("RadiusLaw: probabilities must be positive");
      for (std::size_t j = 0; j < i; ++j)
        if (atoms_[j].radius == a.radius) throw std::invalid_argument("RadiusLaw: radii must be distinct");
      total += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("RadiusLaw: probabilities must sum to 1 (got " + std::to_string(total) + ")");
  }

  const std::vector<Atom>& atoms() const { return atoms_; }

  double mean() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.prob * a.radius;
    return s;
  }

  double second_moment() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.prob * a.radius * a.radius;
    return s;
  }

  double max_radius() const {
    double m = 0.0;
    for (const auto& a : atoms_) m = std::max(m, a.radius);
    return m;
  }

 private:
  std::vector<Atom> atoms_;
};

/// Quadrature hint for expectations over the directional law: integrands that
/// depend on |Pr_L(focus)| have kinks at known polar angles, measured from the
/// focus direction (3D) or as angle offsets from it (2D).
struct DirectionQuadrature {
  std::optional<Vec3> focus;
  std::vector<double> breaks;
};

class DirectionalDistribution {
 public:
  struct Isotropic {};
  struct FixedAxes {
    std::vector<std::pair<Direction, double>> axes;
  };
  struct GirdleBand {
    Direction axis;
    double max_latitude;  // δ in (0, π/2]
  };
  using Variant = std::variant<Isotropic, FixedAxes, GirdleBand>;

  DirectionalDistribution() = default;

  static DirectionalDistribution isotropic() { return DirectionalDistribution(Isotropic{}); }

  static DirectionalDistribution fixed_axes(std::vector<std::pair<Direction, double>> axes) {
    if (axes.empty()) throw std::invalid_argument("FixedAxes: no axes");
    double total = 0.0;
    for (const auto& [dir, w] : axes) {
      if (!(w > 0.0)) throw std::invalid_argument("FixedAxes: weights must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("FixedAxes: weights must sum to 1");
    const int d = axes.front().first.dim();
    for (const auto& a : axes)
      if (a.first.dim() != d) throw std::invalid_argument("FixedAxes: mixed dimensions");
    return DirectionalDistribution(FixedAxes{std::move(axes)});
  }

  static DirectionalDistribution fixed_axis(const Direction& axis) { return fixed_axes({{axis, 1.0}}); }

  static DirectionalDistribution girdle_band(const Direction& axis, double max_latitude) {
    if (!(max_latitude > 0.0 && max_latitude <= std::numbers::pi / 2))
      throw std::invalid_argument("GirdleBand: max latitude must lie in (0, pi/2]");
    return DirectionalDistribution(GirdleBand{axis, max_latitude});
  }

  const Variant& variant() const { return v_; }

  /// Dimension the law is tied to, or 0 for the isotropic law.
  int bound_dim() const {
    if (auto* f = std::get_if<FixedAxes>(&v_)) return f->axes.front().first.dim();
    if (auto* g = std::get_if<GirdleBand>(&v_)) return g->axis.dim();
    return 0;
  }

  Direction sample(int d, RandomStream& rng) const {
    constexpr double pi = std::numbers::pi;
    if (std::holds_alternative<Isotropic>(v_)) {
      if (d == 2) return Direction::from_angle(pi * rng.uniform());
      const double z = rng.uniform(-1.0, 1.0);
      const double phi = 2.0 * pi * rng.uniform();
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      return Direction::from({s * std::cos(phi), s * std::sin(phi), z}, 3);
    }
    if (auto* f = std::get_if<FixedAxes>(&v_)) {
      if (f->axes.size() == 1) return f->axes.front().first;
      double u = rng.uniform(), acc = 0.0;
      for (const auto& [dir, w] : f->axes) {
        acc += w;
        if (u < acc) return dir;
      }
      return f->axes.back().first;
    }
    const auto& g = std::get<GirdleBand>(v_);
    if (d == 2) {
      const Vec3 n = g.axis.vec();
      const double centre = std::atan2(n.x, -n.y);  // angle of perp(axis)
      return Direction::from_angle(centre + rng.uniform(-g.max_latitude, g.max_latitude));
    }
    const double zmax = std::sin(g.max_latitude);
    const double z = rng.uniform(-zmax, zmax);
    const double phi = 2.0 * pi * rng.uniform();
    return from_pole(g.axis.vec(), Subspace::line(g.axis), z, phi);
  }

  /// E_α[f(L)] where L is the direction space built by make_subspace from the
  /// law's parameter direction. Exact for FixedAxes; composite Gauss-Legendre
  /// otherwise (129 nodes per panel in 2D, 65 x 65 per panel in 3D).
  template <class MakeSubspace, class F>
  double expect(int d, const DirectionQuadrature& hint, MakeSubspace&& make_subspace, F&& f) const {
    constexpr double pi = std::numbers::pi;
    if (auto* fa = std::get_if<FixedAxes>(&v_)) {
      double s = 0.0;
      for (const auto& [dir, w] : fa->axes) s += w * f(make_subspace(dir));
      return s;
    }
    if (d == 2) {
      double lo, hi, offset;
      if (std::holds_alternative<Isotropic>(v_)) {
        offset = hint.focus ? std::atan2(hint.focus->y, hint.focus->x) : 0.0;
        lo = 0.0;
        hi = pi;
      } else {
        const auto& g = std::get<GirdleBand>(v_);
        const Vec3 n = g.axis.vec();
        offset = std::atan2(n.x, -n.y);
        lo = -g.max_latitude;
        hi = g.max_latitude;
      }
      std::vector<double> cuts;
      if (hint.focus) {
        const double focus_angle = std::atan2(hint.focus->y, hint.focus->x);
        for (double b : hint.breaks)
          for (int m = -3; m <= 3; ++m) cuts.push_back(focus_angle + b + m * pi - offset);
      }
      auto g = [&](double phi) { return f(make_subspace(Direction::from_angle(offset + phi))); };
      return quad::integrate(g, lo, hi, 129, cuts) / (hi - lo);
    }
    Vec3 pole{0, 0, 1};
    double theta_lo = 0.0, norm_const = 1.0;
    std::vector<double> cuts;
    if (std::holds_alternative<Isotropic>(v_)) {
      if (hint.focus) {
        pole = *hint.focus;
        cuts = hint.breaks;
      }
    } else {
      const auto& g = std::get<GirdleBand>(v_);
      pole = g.axis.vec();
      theta_lo = pi / 2 - g.max_latitude;
      norm_const = std::sin(g.max_latitude);
    }
    const quad::Rule& rule = quad::gauss_legendre(65);
    const Subspace frame = Subspace::line(Direction::from(pole, 3));
    auto over_phi = [&](double theta) {
      const double z = std::cos(theta);
      double s = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double phi = pi * (rule.nodes[i] + 1.0);
        s += rule.weights[i] * f(make_subspace(from_pole(pole, frame, z, phi)));
      }
      return s * std::sin(theta) / 2.0;  // phi-mean times density sin(theta)
    };
    return quad::integrate(over_phi, theta_lo, pi / 2, 65, cuts) / norm_const;
  }

 private:
  explicit DirectionalDistribution(Variant v) : v_(std::move(v)) {}

  // Direction with cos(polar angle) = z about `pole` and azimuth phi.
  static Direction from_pole(Vec3 pole, const Subspace& frame, double z, double phi) {
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 v = z * pole + (s * std::cos(phi)) * frame.frame(0) + (s * std::sin(phi)) * frame.frame(1);
    return Direction::from(v, 3);
  }

  Variant v_ = Isotropic{};
};

/// Base law, independent of direction. Every supported variant is discrete.
class BaseDistribution {
 public:
  struct Deterministic {
    CrossSection section;
  };
  struct DiscRadiusLaw {
    RadiusLaw law;
  };
  struct Mixture {
    std::vector<std::pair<CrossSection, double>> components;
  };
  using Variant = std::variant<Deterministic, DiscRadiusLaw, Mixture>;

  struct Atom {
    CrossSection section;
    double weight;
  };

  static BaseDistribution deterministic(CrossSection k) { return BaseDistribution(Deterministic{std::move(k)}); }
  static BaseDistribution disc_radius_law(RadiusLaw law) { return BaseDistribution(DiscRadiusLaw{std::move(law)}); }
  static BaseDistribution mixture(std::vector<std::pair<CrossSection, double>> comps) {
    if (comps.empty()) throw std::invalid_argument("Mixture: no components");
    double total = 0.0;
    for (const auto& [k, w] : comps) {
      if (!(w > 0.0)) throw std::invalid_argument("Mixture: weights must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("Mixture: weights must sum to 1");
    return BaseDistribution(Mixture{std::move(comps)});
  }

  const Variant& variant() const { return v_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  double mean_area() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight * a.section.area();
    return s;
  }

  double mean_perimeter() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight * a.section.perimeter();
    return s;
  }

  /// Largest circumradius over the support.
  double max_circumradius() const {
    double r = 0.0;
    for (const auto& a : atoms_) r = std::max(r, a.section.circumradius());
    return r;
  }

  /// True when every atom is rotation invariant in its complement.
  bool isotropic_sections() const {
    for (const auto& a : atoms_)
      if (a.section.kind() == CrossSection::Kind::polygon) return false;
    return true;
  }

  const CrossSection& sample(RandomStream& rng) const {
    if (atoms_.size() == 1) return atoms_.front().section;
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& a : atoms_) {
      acc += a.weight;
      if (u < acc) return a.section;
    }
    return atoms_.back().section;
  }

 private:
  explicit BaseDistribution(Variant v) : v_(std::move(v)) {
    if (auto* d = std::get_if<Deterministic>(&v_)) {
      atoms_.push_back({d->section, 1.0});
    } else if (auto* r = std::get_if<DiscRadiusLaw>(&v_)) {
      for (const auto& a : r->law.atoms()) atoms_.push_back({CrossSection::disc(a.radius), a.prob});
    } else {
      for (const auto& [k, w] : std::get<Mixture>(v_).components) atoms_.push_back({k, w});
    }
  }

  Variant v_;
  std::vector<Atom> atoms_;
};

/// Stationary Poisson cylinder process in R^d with k-dimensional direction
/// spaces. λ counts cylinders per unit (d-k)-volume of L^⊥.
class ProcessSpec {
 public:
  ProcessSpec(int d, int k, double lambda, DirectionalDistribution alpha, BaseDistribution base)
      : d_(d), k_(k), lambda_(lambda), alpha_(std::move(alpha)), base_(std::move(base)) {
    if (d != 2 && d != 3) throw std::invalid_argument("ProcessSpec: d must be 2 or 3");
    if (k != 1 && k != d - 1) throw std::invalid_argument("ProcessSpec: k must be 1 or d-1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("ProcessSpec: lambda must be finite and nonnegative");
    const int bd = alpha_.bound_dim();
    if (bd != 0 && bd != d) throw std::invalid_argument("ProcessSpec: directional law has the wrong dimension");
    for (const auto& a : base_.atoms())
      if (a.section.dim() != d - k)
        throw std::invalid_argument("ProcessSpec: " + a.section.name() + " base does not fit a " +
                                    std::to_string(d - k) + "-dimensional cross-section space");
  }

  int d() const { return d_; }
  int k() const { return k_; }
  double lambda() const { return lambda_; }
  const DirectionalDistribution& alpha() const { return alpha_; }
  const BaseDistribution& base() const { return base_; }

  ProcessSpec with_lambda(double lambda) const { return ProcessSpec(d_, k_, lambda, alpha_, base_); }

  /// Direction space for a sampled parameter direction.
  Subspace subspace_for(const Direction& param) const {
    return (k_ == 1 && d_ == 3) ? Subspace::line(param) : Subspace::hyperplane(param);
  }

  /// Enforces λ > 0 and a volume fraction strictly inside (0, 1).
  void require_nondegenerate() const {
    if (!(lambda_ > 0.0)) throw std::invalid_argument("ProcessSpec: lambda must be positive");
    const double abar = base_.mean_area();
    if (!(abar > 0.0)) throw std::invalid_argument("ProcessSpec: mean cross-section area must be positive (p > 0)");
    if (!(-std::expm1(-lambda_ * abar) < 1.0))
      throw std::invalid_argument("ProcessSpec: volume fraction is numerically 1");
  }

  template <class F>
  double expect_over_alpha(const DirectionQuadrature& hint, F&& f) const {
    return alpha_.expect(d_, hint, [this](const Direction& dir) { return subspace_for(dir); },
                         std::forward<F>(f));
  }

 private:
  int d_;
  int k_;
  double lambda_;
  DirectionalDistribution alpha_;
  BaseDistribution base_;
};

struct Shape {
  Subspace direction_space;
  CrossSection section;
};

/// One draw (L, K) from the shape distribution.
inline Shape sample_shape(const ProcessSpec& spec, RandomStream& rng) {
  const Direction dir = spec.alpha().sample(spec.d(), rng);
  Subspace l = spec.subspace_for(dir);
  return {std::move(l), spec.base().sample(rng)};
}

inline double mean_base_area(const ProcessSpec& spec) { return spec.base().mean_area(); }
inline double mean_base_perimeter(const ProcessSpec& spec) { return spec.base().mean_perimeter(); }

}  // namespace cylproc
