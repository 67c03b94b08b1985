#pragma once

// Planar convex geometry on small vertex lists: hulls, clipping, distances,
// separating-axis tests, enclosing circles and union areas of translates.
// Polygons are counterclockwise vertex lists without repetition of the first
// vertex.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace cylproc {

struct Vec2 {
  double u = 0.0;
  double v = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.u + b.u, a.v + b.v}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.u - b.u, a.v - b.v}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.u, -a.v}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.u, s * a.v}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.u * b.u + a.v * b.v; }
constexpr double cross(Vec2 a, Vec2 b) { return a.u * b.v - a.v * b.u; }
inline double norm(Vec2 a) { return std::hypot(a.u, a.v); }
constexpr Vec2 perp(Vec2 a) { return {-a.v, a.u}; }

namespace planar {

using Polygon = std::vector<Vec2>;

inline double signed_area(std::span<const Vec2> p) {
  double s = 0.0;
  for (std::size_t i = 0, n = p.size(); i < n; ++i) s += cross(p[i], p[(i + 1) % n]);
  return 0.5 * s;
}

inline double perimeter(std::span<const Vec2> p) {
  double s = 0.0;
  for (std::size_t i = 0, n = p.size(); i < n; ++i) s += norm(p[(i + 1) % n] - p[i]);
  return s;
}

/// Andrew's monotone chain. Collinear points are dropped.
inline Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.u < b.u || (a.u == b.u && a.v < b.v);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

/// Clip a convex polygon by the half-plane to the left of edge a->b.
inline Polygon clip_halfplane(const Polygon& poly, Vec2 a, Vec2 b) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  const Vec2 e = b - a;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i], q = poly[(i + 1) % n];
    const double sp = cross(e, p - a), sq = cross(e, q - a);
    if (sp >= 0) out.push_back(p);
    if ((sp >= 0) != (sq >= 0)) {
      const double t = sp / (sp - sq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

/// Intersection of two convex polygons (Sutherland-Hodgman).
inline Polygon intersect(const Polygon& subject, const Polygon& clip) {
  Polygon out = subject;
  for (std::size_t i = 0, n = clip.size(); i < n && !out.empty(); ++i)
    out = clip_halfplane(out, clip[i], clip[(i + 1) % n]);
  return out;
}

inline Polygon translate(const Polygon& p, Vec2 t) {
  Polygon out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] + t;
  return out;
}

/// Point-in-convex-polygon with tolerance tol on the signed edge distance.
inline bool contains(std::span<const Vec2> poly, Vec2 x, double tol) {
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    if (cross(e, x - a) < -tol * norm(e)) return false;
  }
  return true;
}

inline double point_segment_distance(Vec2 x, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double ee = dot(e, e);
  double t = ee > 0 ? dot(x - a, e) / ee : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(x - (a + t * e));
}

/// Euclidean distance from x to a convex polygon (0 inside).
inline double distance(std::span<const Vec2> poly, Vec2 x) {
  if (contains(poly, x, 0.0)) return 0.0;
  double best = INFINITY;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i)
    best = std::min(best, point_segment_distance(x, poly[i], poly[(i + 1) % n]));
  return best;
}

/// Length of the projection of the polygon onto the line spanned by dir.
inline double width(std::span<const Vec2> poly, Vec2 dir) {
  double lo = INFINITY, hi = -INFINITY;
  for (Vec2 p : poly) {
    const double s = dot(p, dir);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi - lo;
}

/// Separating-axis overlap test for two convex polygons (touching counts).
inline bool overlap(std::span<const Vec2> a, std::span<const Vec2> b) {
  auto separated_by_edges_of = [](std::span<const Vec2> p, std::span<const Vec2> q) {
    for (std::size_t i = 0, n = p.size(); i < n; ++i) {
      const Vec2 axis = perp(p[(i + 1) % n] - p[i]);
      double pmin = INFINITY, pmax = -INFINITY, qmin = INFINITY, qmax = -INFINITY;
      for (Vec2 x : p) {
        pmin = std::min(pmin, dot(x, axis));
        pmax = std::max(pmax, dot(x, axis));
      }
      for (Vec2 x : q) {
        qmin = std::min(qmin, dot(x, axis));
        qmax = std::max(qmax, dot(x, axis));
      }
      if (pmax < qmin || qmax < pmin) return true;
    }
    return false;
  };
  return !separated_by_edges_of(a, b) && !separated_by_edges_of(b, a);
}

/// Parameter interval of {p0 + t v : t in [0, t_max]} inside the convex
/// polygon (Cyrus-Beck). Returns false when empty or degenerate.
inline bool clip_segment(std::span<const Vec2> poly, Vec2 p0, Vec2 v, double t_max,
                         double& t_in, double& t_out) {
  double lo = 0.0, hi = t_max;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    // inside: cross(e, x - a) >= 0
    const double num = cross(e, p0 - a);
    const double den = cross(e, v);
    if (den == 0.0) {
      if (num < 0.0) return false;
      continue;
    }
    const double t = -num / den;
    if (den > 0.0)
      lo = std::max(lo, t);
    else
      hi = std::min(hi, t);
    if (lo >= hi) return false;
  }
  t_in = lo;
  t_out = hi;
  return true;
}

struct Circle {
  Vec2 center;
  double radius = 0.0;
};

inline Circle circle_from(Vec2 a, Vec2 b) {
  const Vec2 c = 0.5 * (a + b);
  return {c, 0.5 * norm(b - a)};
}

inline Circle circle_from(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 ab = b - a, ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = dot(ab, ab), ac2 = dot(ac, ac);
  const Vec2 o{(ac.v * ab2 - ab.v * ac2) / d, (ab.u * ac2 - ac.u * ab2) / d};
  return {a + o, norm(o)};
}

/// Minimal enclosing circle (incremental; deterministic on the input order).
inline Circle min_enclosing_circle(std::span<const Vec2> pts) {
  auto inside = [](const Circle& c, Vec2 p) {
    return norm(p - c.center) <= c.radius * (1.0 + 1e-12) + 1e-15;
  };
  Circle c{pts.empty() ? Vec2{} : pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (inside(c, pts[i])) continue;
    c = {pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (inside(c, pts[j])) continue;
      c = circle_from(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k)
        if (!inside(c, pts[k])) c = circle_from(pts[i], pts[j], pts[k]);
    }
  }
  return c;
}

/// Area of the lens K ∩ (K + t) for a disc K of radius a, |t| = dist.
inline double disc_lens_area(double a, double dist) {
  if (dist >= 2.0 * a) return 0.0;
  return 2.0 * a * a * std::acos(dist / (2.0 * a)) -
         0.5 * dist * std::sqrt(4.0 * a * a - dist * dist);
}

/// Area of the union of equal discs of radius a centred at `centers`,
/// by Green's theorem over the uncovered boundary arcs.
inline double disc_union_area(double a, std::span<const Vec2> centers) {
  if (a <= 0.0 || centers.empty()) return 0.0;
  std::vector<Vec2> c;
  for (Vec2 p : centers) {
    bool dup = false;
    for (Vec2 q : c) dup = dup || norm(p - q) <= 1e-12 * std::max(1.0, a);
    if (!dup) c.push_back(p);
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::vector<std::pair<double, double>> covered;
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j == i) continue;
      const Vec2 d = c[j] - c[i];
      const double dist = norm(d);
      if (dist >= 2.0 * a) continue;
      const double mid = std::atan2(d.v, d.u);
      const double half = std::acos(dist / (2.0 * a));
      double lo = mid - half, hi = mid + half;
      // Normalise to [0, 2pi), splitting wrap-around.
      lo = std::fmod(lo + 2 * two_pi, two_pi);
      hi = lo + 2.0 * half;
      if (hi > two_pi) {
        covered.emplace_back(lo, two_pi);
        covered.emplace_back(0.0, hi - two_pi);
      } else {
        covered.emplace_back(lo, hi);
      }
    }
    std::sort(covered.begin(), covered.end());
    auto arc = [&](double t0, double t1) {
      // (1/2) ∮ (x dy - y dx) over the arc of circle i from t0 to t1.
      const Vec2 o = c[i];
      return 0.5 * (a * a * (t1 - t0) + a * (o.u * (std::sin(t1) - std::sin(t0)) -
                                             o.v * (std::cos(t1) - std::cos(t0))));
    };
    double cursor = 0.0;
    for (auto [lo, hi] : covered) {
      if (lo > cursor) total += arc(cursor, lo);
      cursor = std::max(cursor, hi);
    }
    if (cursor < two_pi) total += arc(cursor, two_pi);
  }
  return total;
}

/// Area of the union of translates poly + shifts[i] of a convex polygon by
/// inclusion-exclusion; subsets whose intersection is empty are pruned.
inline double polygon_union_area(const Polygon& poly, std::span<const Vec2> shifts) {
  std::vector<Polygon> items;
  for (Vec2 s : shifts) items.push_back(translate(poly, s));
  double total = 0.0;
  // Depth-first over subsets in increasing index order.
  struct Frame {
    Polygon inter;
    std::size_t next;
    int size;
  };
  std::vector<Frame> stack;
  for (std::size_t i = 0; i < items.size(); ++i) stack.push_back({items[i], i + 1, 1});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const double area = std::abs(signed_area(f.inter));
    if (area <= 0.0) continue;
    total += (f.size % 2 == 1 ? area : -area);
    for (std::size_t j = f.next; j < items.size(); ++j) {
      Polygon next = intersect(f.inter, items[j]);
      if (next.size() >= 3) stack.push_back({std::move(next), j + 1, f.size + 1});
    }
  }
  return total;
}

}  // namespace planar
}  // namespace cylproc
