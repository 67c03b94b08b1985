#pragma once

// Exact sampling of the union set inside a box window, plus the geometric
// queries every estimator is built on.
//
// Sampling covers the hitting set with a direction-independent ball D of
// radius R_W + r_max around the projected window centre: a Poisson number of
// cylinders with offsets uniform in D is drawn and those missing the window
// are discarded. Since Pr_L(W) ⊕ (-K) ⊆ D for every shape, the survivors are
// exactly the cylinders of the process that hit W.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cylproc/euclid.hpp"
#include "cylproc/model.hpp"
#include "cylproc/rng.hpp"

namespace cylproc {

/// Axis-aligned box [lo, hi] in R^d (z ignored when d = 2).
class Window {
 public:
  Window(int d, Vec3 lo, Vec3 hi) : d_(d), lo_(lo), hi_(hi) {
    if (d != 2 && d != 3) throw std::invalid_argument("Window: d must be 2 or 3");
    if (d == 2) lo_.z = hi_.z = 0.0;
    for (int i = 0; i < d; ++i)
      if (!(hi_[i] > lo_[i]) || !std::isfinite(lo_[i]) || !std::isfinite(hi_[i]))
        throw std::invalid_argument("Window: need finite lo < hi in every coordinate");
  }

  /// The cube [lo, hi]^d.
  static Window cube(int d, double lo, double hi) {
    return Window(d, {lo, lo, d == 3 ? lo : 0.0}, {hi, hi, d == 3 ? hi : 0.0});
  }

  int dim() const { return d_; }
  const Vec3& lo() const { return lo_; }
  const Vec3& hi() const { return hi_; }
  double side(int i) const { return hi_[i] - lo_[i]; }

  double min_side() const {
    double s = side(0);
    for (int i = 1; i < d_; ++i) s = std::min(s, side(i));
    return s;
  }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < d_; ++i) v *= side(i);
    return v;
  }

  Vec3 center() const { return 0.5 * (lo_ + hi_); }
  double circumradius() const { return 0.5 * norm(hi_ - lo_); }

  bool contains(Vec3 x, double tol = kGeomTol) const {
    for (int i = 0; i < d_; ++i)
      if (x[i] < lo_[i] - tol || x[i] > hi_[i] + tol) return false;
    return true;
  }

  /// The window shrunk by `margin` on every side.
  Window eroded(double margin) const {
    if (!(margin >= 0.0)) throw std::invalid_argument("Window: erosion margin must be nonnegative");
    if (!(2.0 * margin < min_side()))
      throw std::invalid_argument("Window: erosion by " + std::to_string(margin) + " leaves nothing");
    const Vec3 m{margin, margin, d_ == 3 ? margin : 0.0};
    return Window(d_, lo_ + m, hi_ - m);
  }

  std::vector<Vec3> corners() const {
    std::vector<Vec3> c;
    const int n = 1 << d_;
    for (int mask = 0; mask < n; ++mask)
      c.push_back({(mask & 1) ? hi_.x : lo_.x, (mask & 2) ? hi_.y : lo_.y,
                   d_ == 3 ? ((mask & 4) ? hi_.z : lo_.z) : 0.0});
    return c;
  }

  Vec3 uniform_point(RandomStream& rng) const {
    const double x = rng.uniform(lo_.x, hi_.x);
    const double y = rng.uniform(lo_.y, hi_.y);
    const double z = d_ == 3 ? rng.uniform(lo_.z, hi_.z) : 0.0;
    return {x, y, z};
  }

  /// Parameter range {t : anchor + t dir ∈ W}, or nullopt if the line misses.
  std::optional<std::pair<double, double>> clip_line(Vec3 anchor, Vec3 dir) const {
    double t0 = -INFINITY, t1 = INFINITY;
    for (int i = 0; i < d_; ++i) {
      if (dir[i] == 0.0) {
        if (anchor[i] < lo_[i] || anchor[i] > hi_[i]) return std::nullopt;
        continue;
      }
      double a = (lo_[i] - anchor[i]) / dir[i], b = (hi_[i] - anchor[i]) / dir[i];
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
    }
    if (!(t1 > t0)) return std::nullopt;
    return std::pair{t0, t1};
  }

 private:
  int d_;
  Vec3 lo_;
  Vec3 hi_;
};

/// {y : Pr_{L^⊥}(y) ∈ K + offset}, with offset in the complement frame of L.
struct PlacedCylinder {
  Subspace direction_space;
  CrossSection section;
  Vec2 offset;

  Vec2 local(Vec3 x) const { return direction_space.project_along(x) - offset; }
  bool contains(Vec3 x, double tol = kGeomTol) const { return section.contains(local(x), tol); }
  double distance(Vec3 x) const { return section.distance(local(x)); }

  /// Parameter interval of {origin + t dir : t ∈ [0, length]} inside the cylinder.
  std::optional<std::pair<double, double>> chord(Vec3 origin, Vec3 dir, double length) const {
    return section.chord(local(origin), direction_space.project_along(dir), length);
  }
};

using Interval = std::pair<double, double>;

class Realization {
 public:
  Realization(ProcessSpec spec, Window window, std::uint64_t seed, std::vector<PlacedCylinder> cylinders)
      : spec_(std::move(spec)), window_(window), seed_(seed), cylinders_(std::move(cylinders)) {
    if (window_.dim() != spec_.d()) throw std::invalid_argument("Realization: window dimension differs from d");
  }

  const ProcessSpec& spec() const { return spec_; }
  const Window& window() const { return window_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<PlacedCylinder>& cylinders() const { return cylinders_; }
  std::size_t size() const { return cylinders_.size(); }

  bool contains(Vec3 x) const {
    require_inside(x, "contains");
    for (const auto& c : cylinders_)
      if (c.contains(x)) return true;
    return false;
  }

  /// Distance from x to the union of the stored cylinders. Exact as long as
  /// the result is at most the distance from x to the window boundary; beyond
  /// that it is an upper bound. INFINITY for an empty realization.
  double distance_to_union(Vec3 x) const {
    require_inside(x, "distance_to_union");
    double best = INFINITY;
    for (const auto& c : cylinders_) {
      best = std::min(best, c.distance(x));
      if (best == 0.0) break;
    }
    return best;
  }

  /// Merged, sorted intersection of {origin + t dir : 0 <= t <= length} with
  /// the union set. dir must be a unit vector; the segment must lie in W.
  std::vector<Interval> ray_intervals(Vec3 origin, Vec3 dir, double length) const {
    if (std::abs(norm(dir) - 1.0) > kNormTol) throw std::invalid_argument("ray_intervals: dir must be a unit vector");
    if (!(length >= 0.0)) throw std::invalid_argument("ray_intervals: length must be nonnegative");
    require_inside(origin, "ray_intervals");
    if (!window_.contains(origin + length * dir)) throw std::domain_error("ray_intervals: ray leaves the window");
    std::vector<Interval> raw;
    for (const auto& c : cylinders_)
      if (auto iv = c.chord(origin, dir, length)) raw.push_back(*iv);
    return merge(std::move(raw));
  }

  std::vector<Interval> ray_intervals(Vec3 origin, const Direction& dir, double length) const {
    return ray_intervals(origin, dir.vec(), length);
  }

  /// True iff the segment of length `length` from origin meets the union.
  bool ray_hits(Vec3 origin, Vec3 dir, double length) const {
    require_inside(origin, "ray_hits");
    for (const auto& c : cylinders_)
      if (c.chord(origin, dir, length)) return true;
    return false;
  }

  static std::vector<Interval> merge(std::vector<Interval> iv) {
    std::sort(iv.begin(), iv.end());
    std::vector<Interval> out;
    for (const auto& [a, b] : iv) {
      if (!out.empty() && a <= out.back().second)
        out.back().second = std::max(out.back().second, b);
      else
        out.emplace_back(a, b);
    }
    return out;
  }

 private:
  void require_inside(Vec3 x, const char* what) const {
    if (!window_.contains(x)) throw std::domain_error(std::string(what) + ": point outside the window");
  }

  ProcessSpec spec_;
  Window window_;
  std::uint64_t seed_;
  std::vector<PlacedCylinder> cylinders_;
};

namespace detail {

/// Does K + offset meet the projection of the window (given by its projected
/// corners) in the complement of L?
inline bool hits_projection(const CrossSection& k, Vec2 offset, std::span<const Vec2> projected, int m) {
  const double a = k.size_parameter();
  if (m == 1) {
    double lo = INFINITY, hi = -INFINITY;
    for (Vec2 p : projected) {
      lo = std::min(lo, p.u);
      hi = std::max(hi, p.u);
    }
    return offset.u + a >= lo && offset.u - a <= hi;
  }
  const auto hull = planar::convex_hull({projected.begin(), projected.end()});
  if (k.kind() == CrossSection::Kind::disc) return planar::distance(hull, offset) <= a;
  return planar::overlap(hull, planar::translate(k.vertices(), offset));
}

}  // namespace detail

/// Mean number of candidate cylinders drawn per realization.
inline double candidate_mean(const ProcessSpec& spec, const Window& window) {
  const int m = spec.d() - spec.k();
  const double rho = window.circumradius() + spec.base().max_circumradius();
  return spec.lambda() * ball_constants(m).volume * std::pow(rho, m);
}

/// Exact sample of the cylinders hitting `window`. Uses substream 0 of
/// stream `stream`; other substreams are free for the caller.
inline Realization sample_realization(const ProcessSpec& spec, const Window& window, std::uint64_t seed,
                                      std::uint32_t stream = 0) {
  if (window.dim() != spec.d()) throw std::invalid_argument("sample_realization: window dimension differs from d");
  const double r_max = spec.base().max_circumradius();
  if (!std::isfinite(r_max)) throw std::invalid_argument("sample_realization: base support is unbounded");
  const int m = spec.d() - spec.k();
  const double rho = window.circumradius() + r_max;
  RandomStream rng(seed, stream, 0);
  const std::uint64_t n = rng.poisson(candidate_mean(spec, window));
  const auto corners = window.corners();
  const Vec3 centre = window.center();
  std::vector<PlacedCylinder> kept;
  std::vector<Vec2> projected(corners.size());
  for (std::uint64_t i = 0; i < n; ++i) {
    Shape shape = sample_shape(spec, rng);
    const Vec2 c = shape.direction_space.project_along(centre);
    Vec2 offset;
    if (m == 1) {
      offset = {c.u + rho * (2.0 * rng.uniform() - 1.0), 0.0};
    } else {
      const double r = rho * std::sqrt(rng.uniform());
      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      offset = {c.u + r * std::cos(phi), c.v + r * std::sin(phi)};
    }
    for (std::size_t j = 0; j < corners.size(); ++j) projected[j] = shape.direction_space.project_along(corners[j]);
    if (detail::hits_projection(shape.section, offset, projected, m))
      kept.push_back({std::move(shape.direction_space), std::move(shape.section), offset});
  }
  return Realization(spec, window, seed, std::move(kept));
}

// ---------------------------------------------------------------------------
// CSV export / import. Columns: cyl_id, the parameter direction of L (the
// axis for lines, the normal for hyperplanes), the offset in the complement
// frame of L, the shape name, then shape parameters (half-length, radius, or
// polygon vertices x1,y1,x2,y2,... in the same frame). The complement frame is
// the one Subspace builds from the parameter direction, so replay recovers it.
// Numbers are written in shortest round-trip form.

namespace detail {

inline std::string fmt_exact(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc{} || r.ptr != end)
    throw std::invalid_argument("realization CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string realization_csv_header(int d) {
  return d == 3 ? "cyl_id,axis_x,axis_y,axis_z,offset_u,offset_v,shape,param..."
                : "cyl_id,axis_x,axis_y,offset_u,shape,param...";
}

inline void write_realization_csv(std::ostream& os, const Realization& real) {
  const int d = real.spec().d();
  os << realization_csv_header(d) << '\n';
  std::size_t id = 0;
  for (const auto& c : real.cylinders()) {
    const Vec3& axis = c.direction_space.parameter().vec();
    os << id++ << ',' << detail::fmt_exact(axis.x) << ',' << detail::fmt_exact(axis.y);
    if (d == 3) os << ',' << detail::fmt_exact(axis.z);
    os << ',' << detail::fmt_exact(c.offset.u);
    if (d == 3) os << ',' << detail::fmt_exact(c.offset.v);
    os << ',' << c.section.name();
    if (c.section.kind() == CrossSection::Kind::polygon) {
      for (Vec2 p : c.section.vertices()) os << ',' << detail::fmt_exact(p.u) << ',' << detail::fmt_exact(p.v);
    } else {
      os << ',' << detail::fmt_exact(c.section.size_parameter());
    }
    os << '\n';
  }
}

/// Rebuilds a realization written by write_realization_csv. spec, window and
/// seed are not part of the file and must be supplied.
inline Realization read_realization_csv(std::istream& is, const ProcessSpec& spec, const Window& window,
                                        std::uint64_t seed) {
  const int d = spec.d();
  std::string line;
  if (!std::getline(is, line) || line != realization_csv_header(d))
    throw std::invalid_argument("realization CSV: missing or wrong header for d=" + std::to_string(d));
  std::vector<PlacedCylinder> cyl;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    const std::size_t shape_col = d == 3 ? 6 : 4;
    if (f.size() < shape_col + 2)
      throw std::invalid_argument("realization CSV line " + std::to_string(lineno) + ": too few fields");
    auto num = [&](std::size_t i) { return detail::parse_double(f[i], lineno); };
    const Vec3 axis{num(1), num(2), d == 3 ? num(3) : 0.0};
    const Vec2 offset = d == 3 ? Vec2{num(4), num(5)} : Vec2{num(3), 0.0};
    const std::string& shape = f[shape_col];
    CrossSection k = CrossSection::disc(0.0);
    if (shape == "segment") {
      k = CrossSection::segment(num(shape_col + 1));
    } else if (shape == "disc") {
      k = CrossSection::disc(num(shape_col + 1));
    } else if (shape == "polygon") {
      if ((f.size() - shape_col - 1) % 2 != 0)
        throw std::invalid_argument("realization CSV line " + std::to_string(lineno) + ": odd vertex coordinates");
      std::vector<Vec2> v;
      for (std::size_t i = shape_col + 1; i < f.size(); i += 2) v.push_back({num(i), num(i + 1)});
      k = CrossSection::polygon(std::move(v));
    } else {
      throw std::invalid_argument("realization CSV line " + std::to_string(lineno) + ": unknown shape '" + shape + "'");
    }
    if (k.dim() != d - spec.k())
      throw std::invalid_argument("realization CSV line " + std::to_string(lineno) + ": shape does not fit spec");
    cyl.push_back({spec.subspace_for(Direction::from_unit(axis, d)), std::move(k), offset});
  }
  return Realization(spec, window, seed, std::move(cyl));
}

}  // namespace cylproc
