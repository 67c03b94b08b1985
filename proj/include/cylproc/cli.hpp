#pragma once

// Command-line front end. run() is the whole program minus process exit, so
// tests can drive it with argument vectors and string streams.
//
//   cylproc <analytic|estimate|compare|simulate|optimize> --config FILE
//           [--seed N] [--workers N] [--out DIR] [--z-threshold X]
//
// Exit codes: 0 ok, 1 usage or configuration error, 2 a comparison with
// |z| above the threshold.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cylproc/analytic.hpp"
#include "cylproc/config.hpp"
#include "cylproc/estimate.hpp"
#include "cylproc/optimize.hpp"
#include "cylproc/sim.hpp"

namespace cylproc::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCompare = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string out;
  double z_threshold = 4.0;
};

namespace detail {

/// x rounded to 12 significant digits; JSON then prints it in that form.
inline double r12(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(cylproc::detail::fmt12(x).c_str(), nullptr);
}

inline json vec_json(Vec3 v, int d) {
  json a = json::array({r12(v.x), r12(v.y)});
  if (d == 3) a.push_back(r12(v.z));
  return a;
}

inline json report_json(const EstimateReport& r) {
  json j;
  j["name"] = r.name;
  j["estimate"] = r12(r.estimate);
  j["std_error"] = r12(r.std_error);
  j["n_samples"] = r.n_samples;
  j["n_replicates"] = r.n_replicates;
  j["seed"] = r.seed;
  j["analytic"] = r.analytic ? json(r12(*r.analytic)) : json(nullptr);
  j["z_score"] = r.z_score && std::isfinite(*r.z_score) ? json(r12(*r.z_score)) : json(nullptr);
  if (r.z_score && !std::isfinite(*r.z_score)) j["z_score"] = *r.z_score > 0 ? "inf" : "-inf";
  return j;
}

inline const ProcessSpec& need_spec(const RunConfig& cfg) {
  if (!cfg.spec) throw ConfigError("$: this command needs the process fields d, k, lambda, base");
  return *cfg.spec;
}

inline const Window& need_window(const RunConfig& cfg) {
  if (!cfg.window) throw ConfigError("$.window: required field missing");
  return *cfg.window;
}

/// Writes `text` to DIR/name when --out is given.
inline void emit_file(const Flags& flags, const std::string& name, const std::string& text) {
  if (flags.out.empty()) return;
  std::filesystem::create_directories(flags.out);
  std::ofstream f(std::filesystem::path(flags.out) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (std::filesystem::path(flags.out) / name).string());
  f << text;
}

inline std::string csv_row(const std::string& name, double value) { return name + "," + cylproc::detail::fmt12(value) + "\n"; }

inline int cmd_analytic(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const ProcessSpec& spec = need_spec(cfg);
  const int d = spec.d();
  json doc;
  std::string csv = "quantity,value\n";
  const double p = volume_fraction(spec);
  doc["volume_fraction"] = r12(p);
  csv += csv_row("volume_fraction", p);
  doc["covariance"] = json::array();
  for (const Vec3& h : cfg.lags) {
    const double c = covariance(spec, h);
    doc["covariance"].push_back({{"h", vec_json(h, d)}, {"value", r12(c)}});
    csv += csv_row("covariance@h=" + cylproc::detail::fmt_vec(h, d), c);
  }
  doc["spherical_cdf"] = json::array();
  for (double r : cfg.radii) {
    const double v = spherical_cdf(spec, r);
    doc["spherical_cdf"].push_back({{"r", r12(r)}, {"value", r12(v)}});
    csv += csv_row("spherical_cdf@r=" + cylproc::detail::fmt12(r), v);
  }
  if (cfg.eta) {
    const Direction eta = Direction::from(*cfg.eta, d);
    doc["linear_cdf"] = json::array();
    for (double r : cfg.radii) {
      const double v = linear_cdf(spec, eta, r);
      doc["linear_cdf"].push_back({{"r", r12(r)}, {"value", r12(v)}});
      csv += csv_row("linear_cdf@r=" + cylproc::detail::fmt12(r), v);
    }
  }
  const double s = specific_surface(spec);
  doc["specific_surface"] = r12(s);
  csv += csv_row("specific_surface", s);
  if (d == 3 && spec.k() == 1) {
    // Pore-radius moments with c_s = E[S] (the d = 3, k = 1 setting).
    const double cs = spec.base().mean_perimeter();
    const auto pm = pore_moments(spec.lambda(), cs);
    doc["pore_moments"] = {{"c_s", r12(cs)},
                           {"mean", r12(pm.mean)},
                           {"second_moment", r12(pm.second_moment)},
                           {"variance", r12(pm.variance)}};
    csv += csv_row("pore_mean", pm.mean) + csv_row("pore_second_moment", pm.second_moment) +
           csv_row("pore_variance", pm.variance);
  }
  const std::string text = doc.dump(2) + "\n";
  out << text;
  emit_file(flags, "analytic.json", text);
  emit_file(flags, "analytic.csv", csv);
  return kExitOk;
}

inline std::vector<EstimateReport> run_estimators(const RunConfig& cfg, const Flags& flags) {
  const ProcessSpec& spec = need_spec(cfg);
  const Window& window = need_window(cfg);
  const RunOptions opt{cfg.n_reps, flags.seed.value_or(cfg.seed.value_or(0)), flags.workers};
  std::vector<std::string> wanted = cfg.quantities;
  if (wanted.empty()) {
    wanted.push_back("volume_fraction");
    if (!cfg.lags.empty()) wanted.push_back("covariance");
    if (!cfg.radii.empty()) wanted.push_back("spherical_cdf");
    if (!cfg.radii.empty() && cfg.eta) wanted.push_back("linear_cdf");
    wanted.push_back("specific_surface_linescan");
  }
  std::vector<EstimateReport> reports;
  auto append = [&](std::vector<EstimateReport> v) { reports.insert(reports.end(), v.begin(), v.end()); };
  for (const auto& q : wanted) {
    if (q == "volume_fraction") {
      reports.push_back(est_volume_fraction(spec, window, cfg.n_points, opt));
    } else if (q == "covariance") {
      if (cfg.lags.empty()) throw ConfigError("$.lags: required for covariance");
      append(est_covariance(spec, window, cfg.lags, cfg.n_points, opt));
    } else if (q == "spherical_cdf") {
      if (cfg.radii.empty()) throw ConfigError("$.radii: required for spherical_cdf");
      append(est_spherical_cdf(spec, window, cfg.radii, cfg.n_points, opt, cfg.r_cap));
    } else if (q == "linear_cdf") {
      if (cfg.radii.empty()) throw ConfigError("$.radii: required for linear_cdf");
      if (!cfg.eta) throw ConfigError("$.eta: required for linear_cdf");
      append(est_linear_cdf(spec, window, *cfg.eta, cfg.radii, cfg.n_rays, opt));
    } else if (q == "specific_surface_linescan") {
      reports.push_back(est_specific_surface_linescan(spec, window, cfg.n_lines, opt));
    } else if (q == "specific_surface_covderiv") {
      reports.push_back(
          est_specific_surface_covderiv(spec, window, cfg.step, cfg.n_dirs, cfg.n_points, opt, cfg.richardson));
    }
  }
  return reports;
}

inline int cmd_estimate(const RunConfig& cfg, const Flags& flags, std::ostream& out, bool compare) {
  const auto reports = run_estimators(cfg, flags);
  json doc;
  doc["reports"] = json::array();
  double max_abs_z = 0.0;
  for (const auto& r : reports) {
    doc["reports"].push_back(report_json(r));
    if (r.z_score) max_abs_z = std::max(max_abs_z, std::abs(*r.z_score));
  }
  bool pass = true;
  if (compare) {
    pass = max_abs_z <= flags.z_threshold;
    doc["z_threshold"] = r12(flags.z_threshold);
    doc["max_abs_z"] = std::isfinite(max_abs_z) ? json(r12(max_abs_z)) : json("inf");
    doc["pass"] = pass;
  }
  const std::string text = doc.dump(2) + "\n";
  std::ostringstream csv;
  write_reports_csv(csv, reports);
  out << text;
  const std::string stem = compare ? "compare" : "estimate";
  emit_file(flags, stem + ".json", text);
  emit_file(flags, stem + ".csv", csv.str());
  return pass ? kExitOk : kExitCompare;
}

inline int cmd_simulate(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const auto real = sample_realization(need_spec(cfg), need_window(cfg), flags.seed.value_or(cfg.seed.value_or(0)));
  std::ostringstream csv;
  write_realization_csv(csv, real);
  if (flags.out.empty())
    out << csv.str();
  else
    out << "wrote " << real.size() << " cylinders\n";
  emit_file(flags, "realization.csv", csv.str());
  return kExitOk;
}

inline int cmd_optimize(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  if (!cfg.design) throw ConfigError("$: optimize needs lambda, epsilon and r_max");
  const DesignProblem& prob = *cfg.design;
  const auto sol = solve_radius_law(prob);
  json doc;
  doc["radius_law"] = json::array();
  for (const auto& a : sol.radius_law.atoms()) doc["radius_law"].push_back({r12(a.radius), r12(a.prob)});
  doc["c"] = r12(sol.c);
  doc["q"] = r12(sol.q);
  doc["mean_area"] = r12(sol.achieved_mean_area);
  doc["achieved_p"] = r12(sol.achieved_p);
  doc["var_H"] = r12(sol.var_h);
  doc["budget_eps"] = r12(prob.epsilon);
  doc["var_bound_satisfied"] = sol.achieved_var_bound_satisfied;
  doc["verified"] =
      verify_solution(prob, sol, cfg.n_random, flags.seed.value_or(cfg.seed.value_or(0)), flags.workers);
  const std::string text = doc.dump(2) + "\n";
  out << text;
  emit_file(flags, "optimize.json", text);
  return kExitOk;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Poisson cylinder processes: formulas, simulation, estimation and design", "cylproc"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--workers", flags.workers, "worker threads for replicates")->check(CLI::PositiveNumber);
  app.add_option("--out", flags.out, "directory for CSV/JSON output files");
  app.add_option("--z-threshold", flags.z_threshold, "compare: largest acceptable |z|")->check(CLI::PositiveNumber);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"analytic", "evaluate closed forms"},
      {"estimate", "run Monte Carlo estimators"},
      {"compare", "estimate and test against closed forms"},
      {"simulate", "write one realization as CSV"},
      {"optimize", "solve the pore-variance design problem"}};
  for (const auto& [name, help] : commands)
    app.add_subcommand(name, help)->add_option("--config", flags.config, "JSON configuration")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (seed_opt->count() > 0) flags.seed = seed;
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    std::ifstream f(flags.config);
    if (!f) throw ConfigError("cannot open config file '" + flags.config + "'");
    const RunConfig cfg = parse_config(f);
    if (cmd == "analytic") return detail::cmd_analytic(cfg, flags, out);
    if (cmd == "estimate") return detail::cmd_estimate(cfg, flags, out, false);
    if (cmd == "compare") return detail::cmd_estimate(cfg, flags, out, true);
    if (cmd == "simulate") return detail::cmd_simulate(cfg, flags, out);
    return detail::cmd_optimize(cfg, flags, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace cylproc::cli
