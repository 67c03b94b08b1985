#pragma once

// Monte Carlo estimators for the analytic quantities. Each replicate draws a
// fresh realization from stream (seed, replicate index), substream 0; query
// points and directions come from higher substreams of the same stream. The
// reported standard error is the spread of the replicate means, because the
// samples inside one realization are dependent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cylproc/analytic.hpp"
#include "cylproc/parallel.hpp"
#include "cylproc/sim.hpp"

namespace cylproc {

struct EstimateReport {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;  // samples per replicate
  std::uint64_t n_replicates = 0;
  std::uint64_t seed = 0;
  std::optional<double> analytic;
  std::optional<double> z_score;
};

/// Mean and standard error of the replicate values, with the z-score against
/// `analytic` when given. A zero standard error gives z = 0 on exact
/// agreement and ±inf otherwise.
inline EstimateReport summarize(std::string name, const std::vector<double>& reps, std::uint64_t n_samples,
                                std::uint64_t seed, std::optional<double> analytic) {
  EstimateReport rep;
  rep.name = std::move(name);
  rep.n_samples = n_samples;
  rep.n_replicates = reps.size();
  rep.seed = seed;
  double sum = 0.0;
  for (double v : reps) sum += v;
  const double n = static_cast<double>(reps.size());
  rep.estimate = reps.empty() ? 0.0 : sum / n;
  if (reps.size() > 1) {
    double ss = 0.0;
    for (double v : reps) ss += (v - rep.estimate) * (v - rep.estimate);
    rep.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  rep.analytic = analytic;
  if (analytic) {
    const double diff = rep.estimate - *analytic;
    if (rep.std_error > 0.0)
      rep.z_score = diff / rep.std_error;
    else
      rep.z_score = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
  }
  return rep;
}

struct RunOptions {
  std::uint64_t n_reps = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

namespace detail {

inline void require_positive(std::uint64_t n, const char* what) {
  if (n < 1) throw std::invalid_argument(std::string(what) + " must be at least 1");
}

inline std::uint32_t stream_of(std::uint64_t replicate) {
  if (replicate > 0xffffffffULL) throw std::out_of_range("too many replicates for 32-bit stream ids");
  return static_cast<std::uint32_t>(replicate);
}

/// The box W ∩ (W - h): points x with x and x + h both in W.
inline Window lag_window(const Window& w, Vec3 h) {
  Vec3 lo = w.lo(), hi = w.hi();
  lo = {lo.x + std::max(0.0, -h.x), lo.y + std::max(0.0, -h.y), lo.z + std::max(0.0, -h.z)};
  hi = {hi.x - std::max(0.0, h.x), hi.y - std::max(0.0, h.y), hi.z - std::max(0.0, h.z)};
  return Window(w.dim(), lo, hi);
}

/// Haar-uniform unit vector (either orientation).
inline Vec3 random_unit(int d, RandomStream& rng) {
  if (d == 2) {
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    return {std::cos(phi), std::sin(phi), 0.0};
  }
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

inline std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string fmt_vec(Vec3 v, int d) {
  std::string s = "(" + fmt12(v.x) + " " + fmt12(v.y);
  if (d == 3) s += " " + fmt12(v.z);
  return s + ")";
}

/// Uniform points of `w` outside the union set, by rejection, with a cap on
/// the total number of draws. tries() counts every draw so far, which makes
/// found / tries an estimate of the uncovered fraction of `w`.
class UncoveredSampler {
 public:
  UncoveredSampler(const Realization& real, const Window& w, RandomStream& rng, std::uint64_t max_tries)
      : real_(real), w_(w), rng_(rng), budget_(max_tries) {}

  std::optional<Vec3> next() {
    while (tries_ < budget_) {
      ++tries_;
      const Vec3 x = w_.uniform_point(rng_);
      if (!real_.contains(x)) return x;
    }
    return std::nullopt;
  }

  std::uint64_t tries() const { return tries_; }

 private:
  const Realization& real_;
  const Window& w_;
  RandomStream& rng_;
  std::uint64_t budget_;
  std::uint64_t tries_ = 0;
};

/// Per-replicate numerators (one per column) and the shared denominator.
struct RatioSample {
  std::vector<double> num;
  double den = 0.0;
};

/// Ratio-of-means reports Σ num_j / Σ den with the delta-method standard error
/// sqrt(Σ (num_j - R den)² / (n (n - 1))) / mean(den).
inline std::vector<EstimateReport> summarize_ratios(const std::vector<std::string>& names,
                                                    const std::vector<RatioSample>& reps, std::uint64_t n_samples,
                                                    std::uint64_t seed, const std::vector<double>& analytic) {
  double den = 0.0;
  for (const auto& r : reps) den += r.den;
  if (!(den > 0.0)) throw std::runtime_error("no uncovered points found in any replicate (volume fraction too close to 1)");
  const double n = static_cast<double>(reps.size());
  std::vector<EstimateReport> out;
  for (std::size_t j = 0; j < names.size(); ++j) {
    double num = 0.0;
    for (const auto& r : reps) num += r.num[j];
    const double ratio = num / den;
    double se = 0.0;
    if (reps.size() > 1) {
      double ss = 0.0;
      for (const auto& r : reps) ss += (r.num[j] - ratio * r.den) * (r.num[j] - ratio * r.den);
      se = std::sqrt(ss / (n * (n - 1.0))) / (den / n);
    }
    EstimateReport rep;
    rep.name = names[j];
    rep.estimate = ratio;
    rep.std_error = se;
    rep.n_samples = n_samples;
    rep.n_replicates = reps.size();
    rep.seed = seed;
    rep.analytic = analytic[j];
    const double diff = ratio - analytic[j];
    rep.z_score = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
    out.push_back(std::move(rep));
  }
  return out;
}

inline void require_thin_enough(const ProcessSpec& spec) {
  if (volume_fraction(spec) > 0.999)
    throw std::invalid_argument("contact estimators need p <= 0.999 (complement too thin for rejection)");
}

}  // namespace detail

/// Fraction of uniform window points covered by the union set.
inline EstimateReport est_volume_fraction(const ProcessSpec& spec, const Window& window, std::uint64_t n_points,
                                          const RunOptions& opt) {
  detail::require_positive(n_points, "n_points");
  detail::require_positive(opt.n_reps, "n_reps");
  const auto reps = run_replicates(opt.n_reps, opt.workers, [&](std::uint64_t r) {
    const auto real = sample_realization(spec, window, opt.seed, detail::stream_of(r));
    RandomStream rng(opt.seed, detail::stream_of(r), 1);
    std::uint64_t hit = 0;
    for (std::uint64_t i = 0; i < n_points; ++i) hit += real.contains(window.uniform_point(rng));
    return static_cast<double>(hit) / static_cast<double>(n_points);
  });
  return summarize("volume_fraction", reps, n_points, opt.seed, volume_fraction(spec));
}

/// P(x ∈ U, x + h ∈ U) for each lag, with x uniform in W ∩ (W - h). All lags
/// share one uniform stream, so lag 0 reproduces est_volume_fraction exactly.
inline std::vector<EstimateReport> est_covariance(const ProcessSpec& spec, const Window& window,
                                                  const std::vector<Vec3>& lags, std::uint64_t n_points,
                                                  const RunOptions& opt) {
  detail::require_positive(n_points, "n_points");
  detail::require_positive(opt.n_reps, "n_reps");
  const double max_lag = 0.25 * window.min_side();
  std::vector<Window> boxes;
  for (const Vec3& h : lags) {
    if (!(norm(h) < max_lag))
      throw std::invalid_argument("est_covariance: lag " + detail::fmt_vec(h, spec.d()) +
                                  " must be shorter than a quarter of the smallest window side");
    if (spec.d() == 2 && h.z != 0.0) throw std::invalid_argument("est_covariance: 2D lag with nonzero z");
    boxes.push_back(detail::lag_window(window, h));
  }
  const auto reps = run_replicates(opt.n_reps, opt.workers, [&](std::uint64_t r) {
    const auto real = sample_realization(spec, window, opt.seed, detail::stream_of(r));
    std::vector<double> frac;
    for (std::size_t j = 0; j < lags.size(); ++j) {
      RandomStream rng(opt.seed, detail::stream_of(r), 1);
      std::uint64_t hit = 0;
      for (std::uint64_t i = 0; i < n_points; ++i) {
        const Vec3 x = boxes[j].uniform_point(rng);
        hit += real.contains(x) && real.contains(x + lags[j]);
      }
      frac.push_back(static_cast<double>(hit) / static_cast<double>(n_points));
    }
    return frac;
  });
  std::vector<EstimateReport> out;
  for (std::size_t j = 0; j < lags.size(); ++j) {
    std::vector<double> col;
    for (const auto& v : reps) col.push_back(v[j]);
    out.push_back(summarize("covariance@h=" + detail::fmt_vec(lags[j], spec.d()), col, n_points, opt.seed,
                            covariance(spec, lags[j])));
  }
  return out;
}

/// Empirical spherical contact distribution: uncovered points in W eroded by
/// r_cap (default a quarter of the smallest side), fraction within distance r.
/// Replicates are pooled as a ratio of volumes (near ∩ Uᶜ over Uᶜ), not as a
/// mean of per-realization fractions, which is biased when the uncovered
/// volume varies strongly between realizations.
inline std::vector<EstimateReport> est_spherical_cdf(const ProcessSpec& spec, const Window& window,
                                                     const std::vector<double>& radii, std::uint64_t n_points,
                                                     const RunOptions& opt, std::optional<double> r_cap = {}) {
  detail::require_positive(n_points, "n_points");
  detail::require_positive(opt.n_reps, "n_reps");
  const double cap = r_cap.value_or(0.25 * window.min_side());
  for (double r : radii)
    if (!(r >= 0.0 && r <= cap))
      throw std::invalid_argument("est_spherical_cdf: radius " + detail::fmt12(r) + " outside [0, r_cap=" +
                                  detail::fmt12(cap) + "]");
  detail::require_thin_enough(spec);
  const Window inner = window.eroded(cap);
  const auto reps = run_replicates(opt.n_reps, opt.workers, [&](std::uint64_t r) {
    const auto real = sample_realization(spec, window, opt.seed, detail::stream_of(r));
    RandomStream rng(opt.seed, detail::stream_of(r), 1);
    detail::UncoveredSampler sampler(real, inner, rng, 2000 * n_points);
    std::vector<std::uint64_t> hit(radii.size(), 0);
    std::uint64_t found = 0;
    for (; found < n_points; ++found) {
      const auto x = sampler.next();
      if (!x) break;
      const double dist = real.distance_to_union(*x);
      for (std::size_t j = 0; j < radii.size(); ++j) hit[j] += dist <= radii[j];
    }
    detail::RatioSample s;
    const double tries = static_cast<double>(std::max<std::uint64_t>(sampler.tries(), 1));
    for (auto h : hit) s.num.push_back(static_cast<double>(h) / tries);
    s.den = static_cast<double>(found) / tries;
    return s;
  });
  std::vector<std::string> names;
  std::vector<double> exact;
  for (double r : radii) {
    names.push_back("spherical_cdf@r=" + detail::fmt12(r));
    exact.push_back(spherical_cdf(spec, r));
  }
  return detail::summarize_ratios(names, reps, n_points, opt.seed, exact);
}

/// Empirical linear contact distribution in direction eta: uncovered origins
/// x with x + r_max·eta ∈ W; a radius r counts as a hit when the first entry
/// along eta is at most r. Pooled across replicates like est_spherical_cdf.
inline std::vector<EstimateReport> est_linear_cdf(const ProcessSpec& spec, const Window& window, Vec3 eta,
                                                  const std::vector<double>& radii, std::uint64_t n_rays,
                                                  const RunOptions& opt) {
  detail::require_positive(n_rays, "n_rays");
  detail::require_positive(opt.n_reps, "n_reps");
  if (std::abs(norm(eta) - 1.0) > 1e-9) throw std::invalid_argument("est_linear_cdf: eta must be a unit vector");
  eta = (1.0 / norm(eta)) * eta;
  double r_max = 0.0;
  for (double r : radii) {
    if (!(r >= 0.0)) throw std::invalid_argument("est_linear_cdf: radii must be nonnegative");
    r_max = std::max(r_max, r);
  }
  for (int i = 0; i < spec.d(); ++i)
    if (!(r_max * std::abs(eta[i]) < window.side(i)))
      throw std::invalid_argument("est_linear_cdf: longest segment does not fit in the window");
  detail::require_thin_enough(spec);
  const Window origins = detail::lag_window(window, r_max * eta);
  const Direction eta_dir = Direction::from(eta, spec.d());
  const auto reps = run_replicates(opt.n_reps, opt.workers, [&](std::uint64_t r) {
    const auto real = sample_realization(spec, window, opt.seed, detail::stream_of(r));
    RandomStream rng(opt.seed, detail::stream_of(r), 1);
    detail::UncoveredSampler sampler(real, origins, rng, 2000 * n_rays);
    std::vector<std::uint64_t> hit(radii.size(), 0);
    std::uint64_t found = 0;
    for (; found < n_rays; ++found) {
      const auto x = sampler.next();
      if (!x) break;
      const auto iv = real.ray_intervals(*x, eta, r_max);
      if (iv.empty()) continue;
      for (std::size_t j = 0; j < radii.size(); ++j) hit[j] += iv.front().first <= radii[j];
    }
    detail::RatioSample s;
    const double tries = static_cast<double>(std::max<std::uint64_t>(sampler.tries(), 1));
    for (auto h : hit) s.num.push_back(static_cast<double>(h) / tries);
    s.den = static_cast<double>(found) / tries;
    return s;
  });
  std::vector<std::string> names;
  std::vector<double> exact;
  for (double r : radii) {
    names.push_back("linear_cdf@r=" + detail::fmt12(r));
    exact.push_back(linear_cdf(spec, eta_dir, r));
  }
  return detail::summarize_ratios(names, reps, n_rays, opt.seed, exact);
}

/// Specific surface from line sections: for Haar lines through uniform window
/// anchors, the number of component entries strictly inside the clipped
/// segment divided by its length estimates the component intensity of the
/// section; the Crofton constant turns the mean into surface density.
inline EstimateReport est_specific_surface_linescan(const ProcessSpec& spec, const Window& window,
                                                    std::uint64_t n_lines, const RunOptions& opt) {
  detail::require_positive(n_lines, "n_lines");
  detail::require_positive(opt.n_reps, "n_reps");
  const double crofton = crofton_constant(spec.d());
  const auto reps = run_replicates(opt.n_reps, opt.workers, [&](std::uint64_t r) {
    const auto real = sample_realization(spec, window, opt.seed, detail::stream_of(r));
    RandomStream rng(opt.seed, detail::stream_of(r), 1);
    double sum = 0.0;
    for (std::uint64_t i = 0; i < n_lines; ++i) {
      const Vec3 dir = detail::random_unit(spec.d(), rng);
      const Vec3 anchor = window.uniform_point(rng);
      const auto span = window.clip_line(anchor, dir);
      if (!span) continue;  // measure zero: anchor on the boundary, tangent line
      const double len = span->second - span->first;
      if (!(len > 0.0)) continue;
      const auto iv = real.ray_intervals(anchor + span->first * dir, dir, len);
      std::uint64_t entries = 0;
      for (const auto& [a, b] : iv) entries += a > 0.0;
      sum += static_cast<double>(entries) / len;
    }
    return crofton * sum / static_cast<double>(n_lines);
  });
  return summarize("specific_surface_linescan", reps, n_lines, opt.seed, specific_surface(spec));
}

/// Specific surface from the slope of the covariance at the origin:
/// -(d κ_d / κ_{d-1}) times the Haar mean of (Ĉ(step·u) - p̂) / step. The
/// same points serve both terms, so the difference only counts x ∈ U with
/// x + step·u ∉ U. With `richardson`, 2 D(step/2) - D(step) replaces D(step).
inline EstimateReport est_specific_surface_covderiv(const ProcessSpec& spec, const Window& window, double step,
                                                    std::uint64_t n_dirs, std::uint64_t n_points,
                                                    const RunOptions& opt, bool richardson = false) {
  detail::require_positive(n_dirs, "n_dirs");
  detail::require_positive(n_points, "n_points");
  detail::require_positive(opt.n_reps, "n_reps");
  if (!(step > 0.0 && step < 0.25 * window.min_side()))
    throw std::invalid_argument("est_specific_surface_covderiv: step must be in (0, r_cap)");
  const double crofton = crofton_constant(spec.d());
  const auto reps = run_replicates(opt.n_reps, opt.workers, [&](std::uint64_t r) {
    const auto real = sample_realization(spec, window, opt.seed, detail::stream_of(r));
    RandomStream dirs(opt.seed, detail::stream_of(r), 2);
    RandomStream rng(opt.seed, detail::stream_of(r), 1);
    auto slope = [&](Vec3 u, double s) {
      const Window box = detail::lag_window(window, s * u);
      std::int64_t lost = 0;
      for (std::uint64_t i = 0; i < n_points; ++i) {
        const Vec3 x = box.uniform_point(rng);
        lost += real.contains(x) && !real.contains(x + s * u);
      }
      return -static_cast<double>(lost) / static_cast<double>(n_points) / s;
    };
    double sum = 0.0;
    for (std::uint64_t j = 0; j < n_dirs; ++j) {
      const Vec3 u = detail::random_unit(spec.d(), dirs);
      sum += richardson ? 2.0 * slope(u, 0.5 * step) - slope(u, step) : slope(u, step);
    }
    return -crofton * sum / static_cast<double>(n_dirs);
  });
  return summarize(richardson ? "specific_surface_covderiv_richardson" : "specific_surface_covderiv", reps,
                   n_dirs * n_points, opt.seed, specific_surface(spec));
}

inline const char* report_csv_header() {
  return "name,estimate,std_error,n_samples,n_replicates,seed,analytic,z_score";
}

/// CSV rows with 12 significant digits; absent optionals are empty cells.
inline void write_reports_csv(std::ostream& os, const std::vector<EstimateReport>& reports) {
  os << report_csv_header() << '\n';
  for (const auto& r : reports) {
    os << r.name << ',' << detail::fmt12(r.estimate) << ',' << detail::fmt12(r.std_error) << ',' << r.n_samples
       << ',' << r.n_replicates << ',' << r.seed << ',' << (r.analytic ? detail::fmt12(*r.analytic) : "") << ','
       << (r.z_score ? detail::fmt12(*r.z_score) : "") << '\n';
  }
}

}  // namespace cylproc
