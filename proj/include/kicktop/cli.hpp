#pragma once

// Command-line driver: one subcommand per experiment, CSV outputs plus a
// manifest (config echo, version, wall time, checksums).
//
// Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kicktop/classical.hpp"
#include "kicktop/config.hpp"
#include "kicktop/correspondence.hpp"
#include "kicktop/floquet.hpp"
#include "kicktop/io.hpp"
#include "kicktop/spin.hpp"

#ifndef KICKTOP_VERSION_STRING
#define KICKTOP_VERSION_STRING "0.0.0"
#endif

namespace kicktop::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Named in-memory outputs of one run, flushed to disk only after the
/// computation finished.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;

  std::ostringstream& open(std::string name) {
    streams_.emplace_back(std::move(name), std::make_unique<std::ostringstream>());
    return *streams_.back().second;
  }

  void close_all() {
    for (auto& [name, os] : streams_) files.emplace_back(name, os->str());
    streams_.clear();
  }

 private:
  std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> streams_;
};

namespace detail {

inline KickedTopParams params_at(const RunConfig& c, double kappa) {
  KickedTopParams p;
  p.kappa = kappa;
  p.p = c.p;
  p.tau = c.tau;
  p.validate();
  return p;
}

inline double single_kappa(const RunConfig& c) {
  if (c.kappa.is_range()) throw ConfigError(c.subcommand + " takes a single kappa");
  return c.kappa.start;
}

inline SpinJ single_j(const RunConfig& c) {
  if (c.j.is_range()) throw ConfigError(c.subcommand + " takes a single j");
  return SpinJ::from_double(c.j.lo);
}

inline PeriodicOrbit require_orbit(OrbitLabel label, const KickedTopParams& p) {
  auto o = catalog_orbit(label, p);
  if (!o)
    throw NoRoot(std::string(to_string(label)) + " does not exist at kappa=" + io::fmt(p.kappa) +
                 ": " + catalog_absence_reason(label, p.kappa));
  return *o;
}

/// Start point of quantum runs: the orbit's first point, or theta/phi.
inline SphericalPoint start_point(const RunConfig& c, const KickedTopParams& p) {
  if (c.orbit == "POINT") return SphericalPoint(c.theta, c.phi);
  return require_orbit(parse_orbit_label(c.orbit), p).points.front().spherical();
}

inline std::string kick_tag(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", k);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline void run_phase_portrait(const RunConfig& c, Artifacts& a) {
  const auto kicks = kick_list(c.kicks);
  const auto ens = stroboscopic_ensemble(static_cast<std::size_t>(c.n_init), kicks.front(),
                                         detail::params_at(c, detail::single_kappa(c)), c.seed);
  io::write_ensemble_csv(a.open("phase_portrait.csv"), ens);
}

inline void run_bifurcation(const RunConfig& c, Artifacts& a) {
  const auto scan = bifurcation_scan(parse_orbit_label(c.orbit), c.kappa.start, c.kappa.end,
                                     static_cast<std::size_t>(c.kappa.count),
                                     detail::params_at(c, c.kappa.start));
  io::write_bifurcation_csv(a.open("bifurcation.csv"), scan);
}

inline void run_catalog(const RunConfig& c, Artifacts& a) {
  for (double k : c.kappa.values()) {
    const auto cat = orbit_catalog(detail::params_at(c, k));
    const std::string suffix = c.kappa.is_range() ? "_kappa" + io::fmt(k) : "";
    auto& os = a.open("catalog" + suffix + ".csv");
    os << "# kappa=" << io::fmt(k) << '\n';
    io::write_orbits_csv(os, cat.orbits);
    auto& ex = a.open("existence" + suffix + ".csv");
    ex << "# kappa=" << io::fmt(k) << '\n';
    io::write_existence_csv(ex, cat.report);
  }
}

inline void run_husimi(const RunConfig& c, Artifacts& a) {
  const SpinJ j = detail::single_j(c);
  const auto p = detail::params_at(c, detail::single_kappa(c));
  const SphericalPoint start = detail::start_point(c, p);
  std::optional<HusimiResolution> res;
  if (c.grid > 0) res = HusimiResolution{static_cast<std::size_t>(c.grid),
                                         2 * static_cast<std::size_t>(c.grid)};
  const auto kicks = kick_list(c.kicks);
  auto emit = [&](const std::string& stem, const HusimiGrid& g) {
    io::write_husimi_csv(a.open(stem + ".csv"), g);
    if (c.binary) io::write_husimi_binary(a.open(stem + ".bin"), g);
  };
  if (c.average) {
    emit("husimi_average", husimi_time_average(start, j, p, kicks.front(), res));
    return;
  }
  const auto grids = husimi_timeseries(start, j, p, kicks, res);
  for (std::size_t i = 0; i < grids.size(); ++i)
    emit("husimi_k" + detail::kick_tag(kicks[i]), grids[i]);
}

inline void run_survival(const RunConfig& c, Artifacts& a) {
  const auto js = c.j.values();
  const auto kappas = c.kappa.values();
  RotationCache cache;
  std::vector<SurvivalResult> rows;
  for (SpinJ j : js) {
    for (double k : kappas) {
      const auto p = detail::params_at(c, k);
      if (c.orbit == "POINT") {
        rows.push_back(survival_fixed_point(
            ClassicalState::from_spherical(SphericalPoint(c.theta, c.phi)), j, p,
            static_cast<int>(c.L), c.per_kick, &cache));
        continue;
      }
      const OrbitLabel label = parse_orbit_label(c.orbit);
      if (auto o = catalog_orbit_points(label, p)) {
        rows.push_back(survival_period_n(*o, j, p, static_cast<int>(c.L), c.per_kick, &cache));
      } else {
        SurvivalResult r;
        r.label = c.orbit;
        r.j = j;
        r.kappa = k;
        r.period = catalog_period(label);
        r.L = static_cast<int>(c.L);
        r.S = std::numeric_limits<double>::quiet_NaN();
        rows.push_back(r);
      }
    }
  }
  io::write_survival_csv(a.open("survival.csv"), rows, c.per_kick);
}

inline void run_heatmap(const RunConfig& c, Artifacts& a) {
  HeatmapOptions opt;
  opt.base = detail::params_at(c, c.kappa.start);
  if (c.epsilon > 0.0) opt.orthogonality_threshold = c.epsilon;
  opt.integer_j_curve = c.integer_j;
  const auto g = survival_heatmap(parse_orbit_label(c.orbit), c.j.values(), c.kappa.values(),
                                  static_cast<int>(c.L), opt);
  io::write_survival_grid_csv(a.open("heatmap.csv"), g);
  io::write_orthogonality_curve_csv(a.open("orthogonality_curve.csv"), g);
}

inline void run_criteria(const RunConfig& c, Artifacts& a) {
  const auto p = detail::params_at(c, detail::single_kappa(c));
  const OrbitLabel label = parse_orbit_label(c.orbit);
  const PeriodicOrbit orbit = detail::require_orbit(label, p);
  std::vector<PeriodicOrbit> partners;
  if (c.partners == "auto") {
    partners = rx_symmetry_partners(orbit, orbit_catalog(p));
  } else if (c.partners != "none") {
    for (const auto& s : kicktop::cli::detail::split(c.partners, ','))
      partners.push_back(detail::require_orbit(parse_orbit_label(s), p));
  }
  const double eps = c.epsilon > 0.0 ? c.epsilon : default_orthogonality_threshold(label);
  const SpinJ j_min = min_j_for_orthogonality(orbit, partners, eps, c.integer_j);
  const auto report = criteria_report(orbit, partners, detail::single_j(c), eps);
  io::write_criteria_csv(a.open("criteria.csv"), report, j_min);
}

inline void run_find_orbits(const RunConfig& c, Artifacts& a) {
  const auto n = static_cast<std::size_t>(c.seed_grid);
  const auto r = find_periodic_orbits(static_cast<int>(c.period),
                                      detail::params_at(c, detail::single_kappa(c)), n, n);
  auto& os = a.open("orbits.csv");
  os << "# converged_seeds=" << r.converged_seeds << '\n';
  os << "# failed_seeds=" << r.failed_seeds << '\n';
  os << "# divisor_period_seeds=" << r.divisor_period_seeds << '\n';
  io::write_orbits_csv(os, r.orbits);
}

inline void execute(const RunConfig& c, Artifacts& a) {
  const std::string& s = c.subcommand;
  if (s == "phase-portrait") run_phase_portrait(c, a);
  else if (s == "bifurcation") run_bifurcation(c, a);
  else if (s == "catalog") run_catalog(c, a);
  else if (s == "husimi") run_husimi(c, a);
  else if (s == "survival") run_survival(c, a);
  else if (s == "heatmap") run_heatmap(c, a);
  else if (s == "criteria") run_criteria(c, a);
  else if (s == "find-orbits") run_find_orbits(c, a);
  else throw ConfigError("unknown subcommand '" + s + "'");
  a.close_all();
}

// ---------------------------------------------------------------------------
// Manifest

struct FileRecord {
  std::string name;
  std::size_t bytes = 0;
  std::uint64_t checksum = 0;
};

inline std::string manifest_text(const RunConfig& c, const std::vector<FileRecord>& files,
                                 double wall_seconds) {
  std::ostringstream os;
  os << "# kicktop manifest\n";
  os << "# version=" << KICKTOP_VERSION_STRING << '\n';
  os << "# eigen=" << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
     << EIGEN_MINOR_VERSION << '\n';
  os << "# wall_time_s=" << io::fmt(wall_seconds) << '\n';
  for (const auto& f : files)
    os << "# file=" << f.name << " bytes=" << f.bytes << " fnv1a64=" << hex64(f.checksum) << '\n';
  os << serialize(c);
  return os.str();
}

inline std::string manifest_json(const RunConfig& c, const std::vector<FileRecord>& files,
                                 double wall_seconds, const std::vector<Diagnostic>& diags) {
  nlohmann::ordered_json j;
  j["version"] = KICKTOP_VERSION_STRING;
  j["wall_time_s"] = wall_seconds;
  nlohmann::ordered_json cfg;
  cfg["subcommand"] = c.subcommand;
  for (const auto& k : keys_for(c.subcommand)) cfg[k] = field(k).get(c);
  j["config"] = cfg;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : files)
    j["files"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a64", hex64(f.checksum)}});
  j["diagnostics"] = nlohmann::ordered_json::array();
  for (const auto& d : diags)
    j["diagnostics"].push_back({{"severity", std::string(to_string(d.severity))},
                                {"message", d.message}});
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Entry point

inline std::string subcommand_help(std::string_view sub) {
  if (sub == "phase-portrait") return "stroboscopic classical trajectories from a Fibonacci lattice";
  if (sub == "bifurcation") return "max |eigenvalue| of a catalog orbit over a kappa range";
  if (sub == "catalog") return "closed-form periodic orbits, their stability and existence";
  if (sub == "husimi") return "Husimi snapshots (or kick average) of an evolved coherent state";
  if (sub == "survival") return "averaged survival probability S(L) at an orbit or point";
  if (sub == "heatmap") return "S(L) over a (j, kappa) grid with the orthogonality curve";
  if (sub == "criteria") return "coherent-state orthogonality criteria and minimum j";
  if (sub == "find-orbits") return "Newton search for periodic orbits of a given period";
  return {};
}

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes the artifacts; on any failure removes what was written.
inline std::vector<FileRecord> write_outputs(const std::filesystem::path& dir,
                                             const Artifacts& a) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  const bool existed = fs::exists(dir);
  std::vector<FileRecord> records;
  try {
    fs::create_directories(dir);
    for (const auto& [name, data] : a.files) {
      const fs::path path = dir / name;
      std::ofstream out(path, std::ios::binary);
      written.push_back(path);
      out.write(data.data(), static_cast<std::streamsize>(data.size()));
      out.close();
      if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
      records.push_back({name, data.size(), fnv1a64(data)});
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    if (!existed) fs::remove(dir, ec);
    throw;
  }
  return records;
}

}  // namespace detail

/// Runs the driver on argv-style arguments (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();

  CLI::App app{"Kicked-top classical and quantum experiments", "kicktop"};
  app.set_version_flag("--version", KICKTOP_VERSION_STRING);
  app.require_subcommand(0, 1);
  std::string config_path;
  std::string output_override;
  app.add_option("--config", config_path, "flat key=value config file (e.g. a manifest)");
  app.add_option("--output", output_override, "output directory (overrides the config)");

  // Raw flag values per subcommand; applied on top of defaults and the config file.
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, bool>> flags;
  for (const auto& sub : subcommands()) {
    CLI::App* s = app.add_subcommand(sub, subcommand_help(sub));
    for (const auto& key : keys_for(sub)) {
      const FieldSpec& f = field(key);
      const bool is_bool = key == "average" || key == "per-kick" || key == "integer-j" ||
                           key == "binary";
      if (is_bool) {
        std::string names = "--" + key;
        if (key == "integer-j") names += ",!--no-integer-j";
        s->add_flag(names, flags[sub][key], f.help);
      } else {
        std::string names = "--" + key;
        if (key == "kappa") names += ",--kappa-range";
        s->add_option(names, raw[sub][key], f.help);
      }
    }
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << KICKTOP_VERSION_STRING << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  RunConfig cfg;
  std::vector<Diagnostic> diags;
  try {
    std::string sub;
    for (const auto* s : app.get_subcommands()) sub = s->get_name();
    if (!config_path.empty()) {
      cfg = parse_config(detail::read_file(config_path), sub);
      if (!sub.empty() && cfg.subcommand != sub)
        throw ConfigError("config file is for '" + cfg.subcommand + "', not '" + sub + "'");
    } else if (!sub.empty()) {
      cfg = RunConfig::defaults_for(sub);
    } else {
      err << "error: no subcommand given\n\n" << app.help();
      return kExitConfig;
    }
    if (!sub.empty()) {
      CLI::App* s = app.get_subcommand(sub);
      for (const auto& key : keys_for(sub)) {
        const std::string opt = "--" + key;
        if (s->count(opt) == 0) continue;
        if (flags[sub].count(key))
          field(key).set(cfg, flags[sub][key] ? "true" : "false");
        else
          field(key).set(cfg, raw[sub][key]);
      }
    }
    if (!output_override.empty()) cfg.output = output_override;

    diags = validate_config(cfg);
    for (const auto& d : diags) err << to_string(d.severity) << ": " << d.message << '\n';
    if (has_errors(diags)) return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  Artifacts artifacts;
  try {
    execute(cfg, artifacts);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }

  try {
    std::vector<FileRecord> records;
    for (const auto& [name, data] : artifacts.files)
      records.push_back({name, data.size(), fnv1a64(data)});
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    artifacts.files.emplace_back("manifest.txt", manifest_text(cfg, records, wall));
    artifacts.files.emplace_back("manifest.json", manifest_json(cfg, records, wall, diags));
    detail::write_outputs(cfg.output, artifacts);
    for (const auto& r : records) out << cfg.output << '/' << r.name << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace kicktop::cli
