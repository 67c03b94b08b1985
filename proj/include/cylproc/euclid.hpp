#pragma once

// Low-dimensional Euclidean primitives: directions, subspaces with canonical
// complement frames, cross sections with their covariograms, and the ball
// constants.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cylproc/planar.hpp"
#include "cylproc/quadrature.hpp"

namespace cylproc {

/// Tolerance for geometric predicates (membership, clipping).
inline constexpr double kGeomTol = 1e-9;
/// Tolerance for unit-norm checks.
inline constexpr double kNormTol = 1e-12;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
constexpr Vec3 unit_vector(int i) {
  return i == 0 ? Vec3{1, 0, 0} : (i == 1 ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
}

/// A point of G(1, d): a unit vector up to sign. The stored representative
/// has its first nonzero coordinate positive.
class Direction {
 public:
  Direction() = default;

  static Direction from(Vec3 v, int dim) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("Direction: dimension must be 2 or 3");
    if (dim == 2 && v.z != 0.0) throw std::invalid_argument("Direction: z must be 0 in 2D");
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("Direction: zero or non-finite vector");
    v = (1.0 / n) * v;
    for (int i = 0; i < dim; ++i) {
      if (v[i] > 0.0) break;
      if (v[i] < 0.0) {
        v = -v;
        break;
      }
    }
    Direction d;
    d.vec_ = v;
    d.dim_ = dim;
    return d;
  }

  /// Accepts an already canonical unit vector bit-for-bit (used when
  /// replaying serialized realizations).
  static Direction from_unit(Vec3 v, int dim) {
    if (std::abs(norm(v) - 1.0) > kNormTol) return from(v, dim);
    const Direction canon = from(v, dim);
    if (dot(canon.vec_, v) < 0.0) v = -v;
    Direction d;
    d.vec_ = v;
    d.dim_ = dim;
    return d;
  }

  static Direction from_angle(double phi) {
    return from({std::cos(phi), std::sin(phi), 0.0}, 2);
  }

  /// Unit vector from polar angle theta (from e3) and azimuth phi.
  static Direction from_spherical(double theta, double phi) {
    const double s = std::sin(theta);
    return from({s * std::cos(phi), s * std::sin(phi), std::cos(theta)}, 3);
  }

  const Vec3& vec() const { return vec_; }
  int dim() const { return dim_; }

  friend bool operator==(const Direction&, const Direction&) = default;

 private:
  Vec3 vec_{1, 0, 0};
  int dim_ = 3;
};

/// Linear subspace L of R^d together with an orthonormal basis of L and a
/// canonical orthonormal frame of its complement L^⊥. Points of L^⊥ are given
/// as Vec2 coordinates in that frame (v is 0 when L^⊥ is a line).
class Subspace {
 public:
  /// The line spanned by dir.
  static Subspace line(const Direction& dir) {
    Subspace s;
    s.ambient_ = dir.dim();
    s.dim_ = 1;
    s.param_ = dir;
    s.basis_[0] = dir.vec();
    const auto comp = complete({dir.vec()}, s.ambient_);
    for (std::size_t i = 0; i < comp.size(); ++i) s.frame_[i] = comp[i];
    return s;
  }

  /// The hyperplane with unit normal `normal`; its complement frame is the
  /// canonical normal itself.
  static Subspace hyperplane(const Direction& normal) {
    Subspace s;
    s.ambient_ = normal.dim();
    s.dim_ = s.ambient_ - 1;
    s.param_ = normal;
    s.frame_[0] = normal.vec();
    const auto basis = complete({normal.vec()}, s.ambient_);
    for (std::size_t i = 0; i < basis.size(); ++i) s.basis_[i] = basis[i];
    return s;
  }

  int ambient_dim() const { return ambient_; }
  int dim() const { return dim_; }
  int complement_dim() const { return ambient_ - dim_; }
  /// The direction that parameterises the subspace: the spanning direction of
  /// a line, the normal of a hyperplane (in 2D a line is built from its normal
  /// when it was constructed with hyperplane()).
  const Direction& parameter() const { return param_; }
  const Vec3& basis(int i) const { return basis_.at(i); }
  const Vec3& frame(int i) const { return frame_.at(i); }

  /// Coordinates of x - Pr_L(x) in the complement frame.
  Vec2 project_along(Vec3 x) const {
    return {dot(x, frame_[0]), complement_dim() == 2 ? dot(x, frame_[1]) : 0.0};
  }

  /// The point of R^d with complement coordinates c.
  Vec3 embed(Vec2 c) const {
    Vec3 r = c.u * frame_[0];
    if (complement_dim() == 2) r = r + c.v * frame_[1];
    return r;
  }

  /// Orthogonal projection of x onto L.
  Vec3 project_onto(Vec3 x) const { return x - embed(project_along(x)); }

 private:
  // Deterministic Gram-Schmidt of the fallback basis e1, ..., ed against
  // `given`; returns the accepted completion vectors.
  static std::vector<Vec3> complete(std::vector<Vec3> given, int d) {
    const std::size_t want = static_cast<std::size_t>(d);
    std::vector<Vec3> added;
    for (int i = 0; i < d && given.size() < want; ++i) {
      Vec3 r = unit_vector(i);
      for (int pass = 0; pass < 2; ++pass)
        for (const Vec3& b : given) r = r - dot(r, b) * b;
      const double n = norm(r);
      if (n < 1e-3) continue;
      r = (1.0 / n) * r;
      given.push_back(r);
      added.push_back(r);
    }
    return added;
  }

  int ambient_ = 3;
  int dim_ = 1;
  Direction param_;
  std::array<Vec3, 2> basis_{};
  std::array<Vec3, 2> frame_{};
};

/// [xi, eta]: volume of the parallelepiped spanned by an orthonormal basis of
/// xi and the unit vector eta, i.e. the length of eta's component in xi^⊥.
inline double subspace_det(const Subspace& xi, const Direction& eta) {
  if (xi.ambient_dim() != eta.dim()) throw std::invalid_argument("subspace_det: dimension mismatch");
  return std::min(1.0, norm(xi.project_along(eta.vec())));
}

inline Vec2 project_along(Vec3 x, const Subspace& l) { return l.project_along(x); }

struct BallConstants {
  double volume;   // kappa_m
  double surface;  // omega_m
};

/// Volume and surface area of the unit ball in R^m, 0 <= m <= 3.
inline BallConstants ball_constants(int m) {
  constexpr double pi = std::numbers::pi;
  switch (m) {
    case 0: return {1.0, 0.0};
    case 1: return {2.0, 2.0};
    case 2: return {pi, 2.0 * pi};
    case 3: return {4.0 * pi / 3.0, 4.0 * pi};
    default: throw std::out_of_range("ball_constants: m must be in 0..3");
  }
}

/// d κ_d / κ_{d-1}: the Crofton constant turning the Haar mean of line-section
/// component intensities into surface density.
inline double crofton_constant(int d) {
  return d * ball_constants(d).volume / ball_constants(d - 1).volume;
}

/// Base of a cylinder, in the canonical frame of L^⊥.
class CrossSection {
 public:
  enum class Kind { segment, disc, polygon };

  /// [-a, a] in a one-dimensional complement; boundary measure 2.
  static CrossSection segment(double half_length) {
    if (!(half_length > 0.0) || !std::isfinite(half_length))
      throw std::invalid_argument("CrossSection: segment half-length must be positive");
    CrossSection k;
    k.kind_ = Kind::segment;
    k.a_ = half_length;
    return k;
  }

  /// Disc of radius a >= 0 centred at the origin. Radius 0 is the degenerate
  /// fibre produced by radius laws with an atom at 0.
  static CrossSection disc(double radius) {
    if (!(radius >= 0.0) || !std::isfinite(radius))
      throw std::invalid_argument("CrossSection: disc radius must be nonnegative");
    CrossSection k;
    k.kind_ = Kind::disc;
    k.a_ = radius;
    return k;
  }

  /// Convex polygon. Vertices may be given in either orientation and are
  /// stored counterclockwise, translated so that the centre of the minimal
  /// enclosing circle is the origin.
  static CrossSection polygon(std::vector<Vec2> vertices) {
    const std::size_t n = vertices.size();
    if (n < 3) throw std::invalid_argument("CrossSection: polygon needs at least 3 vertices");
    double area = planar::signed_area(vertices);
    if (area < 0.0) {
      std::reverse(vertices.begin(), vertices.end());
      area = -area;
    }
    if (!(area > 0.0)) throw std::invalid_argument("CrossSection: polygon has zero area");
    const double scale = planar::perimeter(vertices);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e0 = vertices[(i + 1) % n] - vertices[i];
      const Vec2 e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
      if (cross(e0, e1) <= kGeomTol * scale * scale)
        throw std::invalid_argument("CrossSection: polygon is not strictly convex");
    }
    const auto mec = planar::min_enclosing_circle(vertices);
    CrossSection k;
    k.kind_ = Kind::polygon;
    k.vertices_ = norm(mec.center) > 1e-12 * mec.radius ? planar::translate(vertices, -mec.center)
                                                         : std::move(vertices);
    double r = 0.0;
    for (Vec2 p : k.vertices_) r = std::max(r, norm(p));
    k.a_ = r;
    return k;
  }

  Kind kind() const { return kind_; }
  /// Dimension of the complement the section lives in (1 or 2).
  int dim() const { return kind_ == Kind::segment ? 1 : 2; }
  /// Half-length for segments, radius for discs, circumradius for polygons.
  double size_parameter() const { return a_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }

  std::string name() const {
    switch (kind_) {
      case Kind::segment: return "segment";
      case Kind::disc: return "disc";
      default: return "polygon";
    }
  }

  double area() const {
    switch (kind_) {
      case Kind::segment: return 2.0 * a_;
      case Kind::disc: return std::numbers::pi * a_ * a_;
      default: return planar::signed_area(vertices_);
    }
  }

  /// Boundary measure S(K): 2 for a segment (two endpoints), the perimeter
  /// otherwise.
  double perimeter() const {
    switch (kind_) {
      case Kind::segment: return 2.0;
      case Kind::disc: return 2.0 * std::numbers::pi * a_;
      default: return planar::perimeter(vertices_);
    }
  }

  /// Radius of the smallest origin-centred ball containing K.
  double circumradius() const { return a_; }

  double diameter() const {
    if (kind_ != Kind::polygon) return 2.0 * a_;
    double d = 0.0;
    for (Vec2 p : vertices_)
      for (Vec2 q : vertices_) d = std::max(d, norm(p - q));
    return d;
  }

  bool contains(Vec2 p, double tol = kGeomTol) const {
    switch (kind_) {
      case Kind::segment: return std::abs(p.u) <= a_ + tol;
      case Kind::disc: return p.u * p.u + p.v * p.v <= (a_ + tol) * (a_ + tol);
      default: return planar::contains(vertices_, p, tol);
    }
  }

  /// Distance from p to K within the complement (0 inside).
  double distance(Vec2 p) const {
    switch (kind_) {
      case Kind::segment: return std::max(0.0, std::abs(p.u) - a_);
      case Kind::disc: return std::max(0.0, norm(p) - a_);
      default: return planar::distance(vertices_, p);
    }
  }

  /// γ_K(t) = ν(K ∩ (K - t)).
  double covariogram(Vec2 t) const {
    switch (kind_) {
      case Kind::segment: return std::max(0.0, 2.0 * a_ - std::abs(t.u));
      case Kind::disc: return planar::disc_lens_area(a_, norm(t));
      default: {
        const auto inter = planar::intersect(vertices_, planar::translate(vertices_, -t));
        return inter.size() < 3 ? 0.0 : std::abs(planar::signed_area(inter));
      }
    }
  }

  /// One-sided derivative of γ_K at the origin in the unit direction u.
  double covariogram_derivative(Vec2 u) const {
    switch (kind_) {
      case Kind::segment: return -1.0;
      case Kind::disc: return -2.0 * a_;
      default: return -planar::width(vertices_, perp(u));
    }
  }

  /// Parameter interval of {p0 + t v : 0 <= t <= t_max} inside K.
  std::optional<std::pair<double, double>> chord(Vec2 p0, Vec2 v, double t_max) const {
    switch (kind_) {
      case Kind::segment: {
        if (v.u == 0.0) {
          if (std::abs(p0.u) <= a_) return std::pair{0.0, t_max};
          return std::nullopt;
        }
        double t0 = (-a_ - p0.u) / v.u, t1 = (a_ - p0.u) / v.u;
        if (t0 > t1) std::swap(t0, t1);
        t0 = std::max(t0, 0.0);
        t1 = std::min(t1, t_max);
        if (t0 >= t1) return std::nullopt;
        return std::pair{t0, t1};
      }
      case Kind::disc: {
        const double vv = dot(v, v);
        const double pp = dot(p0, p0) - a_ * a_;
        if (vv <= 1e-24) {
          if (pp <= 0.0 && a_ > 0.0) return std::pair{0.0, t_max};
          return std::nullopt;
        }
        const double b = dot(p0, v);
        const double disc = b * b - vv * pp;
        // Tangencies (and zero-radius fibres) contribute nothing.
        if (disc <= 1e-12 * vv * std::max(1.0, a_ * a_)) return std::nullopt;
        const double s = std::sqrt(disc);
        const double t0 = std::max((-b - s) / vv, 0.0);
        const double t1 = std::min((-b + s) / vv, t_max);
        if (t0 >= t1) return std::nullopt;
        return std::pair{t0, t1};
      }
      default: {
        double t0, t1;
        if (!planar::clip_segment(vertices_, p0, v, t_max, t0, t1)) return std::nullopt;
        return std::pair{t0, t1};
      }
    }
  }

  /// The reflection -K.
  CrossSection reflected() const {
    if (kind_ != Kind::polygon) return *this;
    CrossSection k = *this;
    for (Vec2& p : k.vertices_) p = -p;
    return k;
  }

  /// Area (length) of the union of the translates K + shifts[i].
  double union_of_translates(std::span<const Vec2> shifts) const {
    switch (kind_) {
      case Kind::segment: {
        std::vector<std::pair<double, double>> iv;
        for (Vec2 s : shifts) iv.emplace_back(s.u - a_, s.u + a_);
        std::sort(iv.begin(), iv.end());
        double total = 0.0, lo = -INFINITY, hi = -INFINITY;
        for (auto [a, b] : iv) {
          if (a > hi) {
            if (hi > lo) total += hi - lo;
            lo = a;
            hi = b;
          } else {
            hi = std::max(hi, b);
          }
        }
        if (hi > lo) total += hi - lo;
        return total;
      }
      case Kind::disc: return planar::disc_union_area(a_, shifts);
      default: return planar::polygon_union_area(vertices_, shifts);
    }
  }

 private:
  Kind kind_ = Kind::disc;
  double a_ = 0.0;
  std::vector<Vec2> vertices_;
};

/// Free-function spellings of the cross-section operations.
inline double covariogram(const CrossSection& k, Vec2 t) { return k.covariogram(t); }
inline double covariogram_derivative_at_origin(const CrossSection& k, Vec2 u) {
  return k.covariogram_derivative(u);
}

/// Haar mean of [xi', xi] over xi' in G(1, d), for a line or hyperplane xi.
/// Integrated in a frame whose pole is xi's parameter direction.
inline double grassmann_average_det(int d, const Subspace& xi) {
  if (d != xi.ambient_dim()) throw std::invalid_argument("grassmann_average_det: dimension mismatch");
  const bool is_line = xi.dim() == 1;
  if (d == 2) {
    // xi' at angle phi from xi: [xi', xi] = |sin phi|.
    constexpr double pi = std::numbers::pi;
    return quad::integrate([](double phi) { return std::abs(std::sin(phi)); }, 0.0, pi, 129) / pi;
  }
  // Uniform direction on the upper hemisphere about the pole: density sin(theta).
  auto f = [is_line](double theta) {
    const double det = is_line ? std::sin(theta) : std::abs(std::cos(theta));
    return det * std::sin(theta);
  };
  return quad::integrate(f, 0.0, std::numbers::pi / 2, 65);
}

}  // namespace cylproc
