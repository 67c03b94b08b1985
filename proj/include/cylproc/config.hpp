#pragma once

// Run configuration: one JSON document describing the process, the window
// and the sampling parameters. Every object is checked against its allowed
// keys, and errors carry the JSON path of the offending field.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylproc/euclid.hpp"
#include "cylproc/model.hpp"
#include "cylproc/optimize.hpp"
#include "cylproc/sim.hpp"

namespace cylproc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::optional<ProcessSpec> spec;
  std::optional<Window> window;
  std::vector<Vec3> lags;
  std::vector<double> radii;
  std::optional<Vec3> eta;
  std::vector<std::string> quantities;
  std::uint64_t n_points = 10000;
  std::uint64_t n_reps = 10;
  std::uint64_t n_rays = 10000;
  std::uint64_t n_lines = 10000;
  std::uint64_t n_dirs = 20;
  double step = 0.02;
  bool richardson = false;
  std::optional<double> r_cap;
  std::optional<std::uint64_t> seed;
  std::optional<DesignProblem> design;
  std::uint64_t n_random = 1000;
};

inline const std::vector<std::string>& known_quantities() {
  static const std::vector<std::string> q{"volume_fraction",           "covariance",
                                          "spherical_cdf",             "linear_cdf",
                                          "specific_surface_linescan", "specific_surface_covderiv"};
  return q;
}

namespace detail {

using nlohmann::json;

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }

  void require_object(const std::set<std::string>& allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (const auto& [key, value] : j_.items())
      if (!allowed.count(key)) throw ConfigError(path_ + "." + key + ": unknown field");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Node at(const std::string& key) const {
    if (!j_.contains(key)) throw ConfigError(path_ + "." + key + ": required field missing");
    return {j_.at(key), path_ + "." + key};
  }

  Node at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::size_t array_size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  std::uint64_t count() const {
    if (!j_.is_number_integer() || j_.get<std::int64_t>() < 1) fail("expected a positive integer");
    return j_.get<std::uint64_t>();
  }

  std::uint64_t uint() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0))
      fail("expected a nonnegative integer");
    return j_.get<std::uint64_t>();
  }

  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<int>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  /// A d-vector of numbers, padded with z = 0 in 2D.
  Vec3 vec(int d) const {
    if (array_size() != static_cast<std::size_t>(d)) fail("expected " + std::to_string(d) + " numbers");
    return {at(0).number(), at(1).number(), d == 3 ? at(2).number() : 0.0};
  }

 private:
  const json& j_;
  std::string path_;
};

/// Runs f and rethrows domain errors as ConfigError at `node`.
template <class F>
auto at_node(const Node& node, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    node.fail(e.what());
  }
}

inline Direction parse_direction(const Node& n, int d) {
  return at_node(n, [&] { return Direction::from(n.vec(d), d); });
}

inline DirectionalDistribution parse_alpha(const Node& n, int d) {
  if (!n.raw().is_object()) n.fail("expected an object");
  const std::string type = n.at("type").string();
  if (type == "isotropic") {
    n.require_object({"type"});
    return DirectionalDistribution::isotropic();
  }
  if (type == "fixed_axes") {
    n.require_object({"type", "axes"});
    const Node axes = n.at("axes");
    std::vector<std::pair<Direction, double>> list;
    for (std::size_t i = 0; i < axes.array_size(); ++i) {
      const Node a = axes.at(i);
      a.require_object({"direction", "weight"});
      list.emplace_back(parse_direction(a.at("direction"), d), a.has("weight") ? a.at("weight").number() : 1.0);
    }
    return at_node(axes, [&] { return DirectionalDistribution::fixed_axes(std::move(list)); });
  }
  if (type == "girdle_band") {
    n.require_object({"type", "axis", "max_latitude"});
    const Direction axis = parse_direction(n.at("axis"), d);
    const double lat = n.at("max_latitude").number();
    return at_node(n, [&] { return DirectionalDistribution::girdle_band(axis, lat); });
  }
  n.at("type").fail("unknown directional law '" + type + "' (isotropic, fixed_axes, girdle_band)");
}

inline CrossSection parse_section(const Node& n) {
  if (!n.raw().is_object()) n.fail("expected an object");
  const std::string shape = n.at("shape").string();
  if (shape == "segment") {
    n.require_object({"shape", "half_length"});
    const Node a = n.at("half_length");
    return at_node(a, [&] { return CrossSection::segment(a.number()); });
  }
  if (shape == "disc") {
    n.require_object({"shape", "radius"});
    const Node a = n.at("radius");
    return at_node(a, [&] { return CrossSection::disc(a.number()); });
  }
  if (shape == "polygon") {
    n.require_object({"shape", "vertices"});
    const Node vs = n.at("vertices");
    std::vector<Vec2> v;
    for (std::size_t i = 0; i < vs.array_size(); ++i) {
      const Vec3 p = vs.at(i).vec(2);
      v.push_back({p.x, p.y});
    }
    return at_node(vs, [&] { return CrossSection::polygon(std::move(v)); });
  }
  n.at("shape").fail("unknown shape '" + shape + "' (segment, disc, polygon)");
}

inline BaseDistribution parse_base(const Node& n) {
  if (!n.raw().is_object()) n.fail("expected an object");
  const std::string type = n.at("type").string();
  if (type == "deterministic") {
    n.require_object({"type", "section"});
    return BaseDistribution::deterministic(parse_section(n.at("section")));
  }
  if (type == "disc_radius_law") {
    n.require_object({"type", "law"});
    const Node law = n.at("law");
    std::vector<RadiusLaw::Atom> atoms;
    for (std::size_t i = 0; i < law.array_size(); ++i) {
      const Node a = law.at(i);
      if (a.array_size() != 2) a.fail("expected [radius, probability]");
      atoms.push_back({a.at(0).number(), a.at(1).number()});
    }
    return at_node(law, [&] { return BaseDistribution::disc_radius_law(RadiusLaw(std::move(atoms))); });
  }
  if (type == "mixture") {
    n.require_object({"type", "components"});
    const Node comps = n.at("components");
    std::vector<std::pair<CrossSection, double>> list;
    for (std::size_t i = 0; i < comps.array_size(); ++i) {
      const Node c = comps.at(i);
      c.require_object({"section", "weight"});
      list.emplace_back(parse_section(c.at("section")), c.at("weight").number());
    }
    return at_node(comps, [&] { return BaseDistribution::mixture(std::move(list)); });
  }
  n.at("type").fail("unknown base law '" + type + "' (deterministic, disc_radius_law, mixture)");
}

}  // namespace detail

/// Parses and validates a configuration document. Throws ConfigError with the
/// JSON path of the first problem.
inline RunConfig parse_config(const nlohmann::json& doc) {
  using detail::Node;
  const Node root(doc, "$");
  root.require_object({"d", "k", "lambda", "alpha", "base", "window", "lags", "radii", "eta", "quantities",
                       "n_points", "n_reps", "n_rays", "n_lines", "n_dirs", "step", "richardson", "r_cap", "seed",
                       "epsilon", "r_max", "n_random"});
  RunConfig cfg;
  int d = 0;
  if (root.has("d") || root.has("base")) {
    const Node dn = root.at("d");
    d = dn.integer();
    if (d != 2 && d != 3) dn.fail("d must be 2 or 3");
    const int k = root.at("k").integer();
    const double lambda = root.at("lambda").number();
    auto alpha = root.has("alpha") ? detail::parse_alpha(root.at("alpha"), d) : DirectionalDistribution::isotropic();
    auto base = detail::parse_base(root.at("base"));
    cfg.spec = detail::at_node(root, [&] {
      ProcessSpec spec(d, k, lambda, std::move(alpha), std::move(base));
      spec.require_nondegenerate();
      return spec;
    });
  }
  auto need_d = [&](const char* key) {
    if (d == 0) throw ConfigError(std::string("$.") + key + ": needs the process fields d, k, lambda, base");
  };
  if (root.has("window")) {
    need_d("window");
    const Node w = root.at("window");
    w.require_object({"lo", "hi"});
    const Vec3 lo = w.at("lo").vec(d), hi = w.at("hi").vec(d);
    cfg.window = detail::at_node(w, [&] { return Window(d, lo, hi); });
  }
  if (root.has("lags")) {
    need_d("lags");
    const Node l = root.at("lags");
    for (std::size_t i = 0; i < l.array_size(); ++i) cfg.lags.push_back(l.at(i).vec(d));
  }
  if (root.has("radii")) {
    const Node r = root.at("radii");
    for (std::size_t i = 0; i < r.array_size(); ++i) {
      const double v = r.at(i).number();
      if (v < 0.0) r.at(i).fail("radius must be nonnegative");
      cfg.radii.push_back(v);
    }
  }
  if (root.has("eta")) {
    need_d("eta");
    cfg.eta = detail::parse_direction(root.at("eta"), d).vec();
  }
  if (root.has("quantities")) {
    const Node q = root.at("quantities");
    for (std::size_t i = 0; i < q.array_size(); ++i) {
      const std::string name = q.at(i).string();
      const auto& known = known_quantities();
      if (std::find(known.begin(), known.end(), name) == known.end()) q.at(i).fail("unknown quantity '" + name + "'");
      cfg.quantities.push_back(name);
    }
  }
  if (root.has("n_points")) cfg.n_points = root.at("n_points").count();
  if (root.has("n_reps")) cfg.n_reps = root.at("n_reps").count();
  if (root.has("n_rays")) cfg.n_rays = root.at("n_rays").count();
  if (root.has("n_lines")) cfg.n_lines = root.at("n_lines").count();
  if (root.has("n_dirs")) cfg.n_dirs = root.at("n_dirs").count();
  if (root.has("n_random")) cfg.n_random = root.at("n_random").count();
  if (root.has("step")) {
    cfg.step = root.at("step").number();
    if (!(cfg.step > 0.0)) root.at("step").fail("step must be positive");
  }
  if (root.has("richardson")) cfg.richardson = root.at("richardson").boolean();
  if (root.has("r_cap")) {
    cfg.r_cap = root.at("r_cap").number();
    if (!(*cfg.r_cap > 0.0)) root.at("r_cap").fail("r_cap must be positive");
  }
  if (root.has("seed")) cfg.seed = root.at("seed").uint();
  if (root.has("epsilon") || root.has("r_max")) {
    DesignProblem p{root.at("lambda").number(), root.at("epsilon").number(), root.at("r_max").number()};
    detail::at_node(root, [&] {
      p.validate();
      return 0;
    });
    cfg.design = p;
  }
  return cfg;
}

inline RunConfig parse_config(std::istream& is) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("$: malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace cylproc
