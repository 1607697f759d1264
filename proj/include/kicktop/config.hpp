#pragma once

// Run configuration for the command-line driver: typed parameters, a flat
// key=value text form that round-trips exactly, and validation diagnostics.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kicktop/classical.hpp"
#include "kicktop/errors.hpp"
#include "kicktop/spin.hpp"

namespace kicktop::cli {

/// Malformed configuration or command line.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"phase-portrait", "bifurcation", "catalog",
                                              "husimi",         "survival",    "heatmap",
                                              "criteria",       "find-orbits"};
  return names;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view key, std::string_view s) {
  const std::string t = trim(s);
  if (t == "pi/2") return std::numbers::pi / 2.0;
  if (t == "pi") return std::numbers::pi;
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw ConfigError("");
    return v;
  } catch (...) {
    throw ConfigError("invalid number for " + std::string(key) + ": '" + t + "'");
  }
}

inline std::int64_t parse_int(std::string_view key, std::string_view s) {
  const std::string t = trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("invalid integer for " + std::string(key) + ": '" + t + "'");
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view s) {
  const std::string t = trim(s);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError("invalid boolean for " + std::string(key) + ": '" + t + "'");
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// start:end:count, or a single value.
struct KappaSpec {
  double start = 3.0;
  double end = 3.0;
  std::int64_t count = 1;

  static KappaSpec parse(std::string_view s) {
    const auto parts = detail::split(s, ':');
    KappaSpec k;
    if (parts.size() == 1) {
      k.start = k.end = detail::parse_double("kappa", parts[0]);
      k.count = 1;
    } else if (parts.size() == 3) {
      k.start = detail::parse_double("kappa", parts[0]);
      k.end = detail::parse_double("kappa", parts[1]);
      k.count = detail::parse_int("kappa count", parts[2]);
    } else {
      throw ConfigError("kappa expects a value or start:end:count, got '" + std::string(s) + "'");
    }
    return k;
  }

  std::string str() const {
    if (count == 1 && start == end) return detail::fmt(start);
    return detail::fmt(start) + ":" + detail::fmt(end) + ":" + std::to_string(count);
  }

  bool is_range() const { return count != 1 || start != end; }

  std::vector<double> values() const {
    if (count < 1) return {};
    return linspace(start, end, static_cast<std::size_t>(count));
  }
};

/// lo:hi[:step] (inclusive, default step 1), or a single j.
struct JSpec {
  double lo = 10.0;
  double hi = 10.0;
  double step = 1.0;

  static JSpec parse(std::string_view s) {
    const auto parts = detail::split(s, ':');
    JSpec j;
    if (parts.size() == 1) {
      j.lo = j.hi = detail::parse_double("j", parts[0]);
    } else if (parts.size() == 2 || parts.size() == 3) {
      j.lo = detail::parse_double("j", parts[0]);
      j.hi = detail::parse_double("j", parts[1]);
      if (parts.size() == 3) j.step = detail::parse_double("j step", parts[2]);
    } else {
      throw ConfigError("j expects a value or lo:hi[:step], got '" + std::string(s) + "'");
    }
    return j;
  }

  std::string str() const {
    if (lo == hi) return detail::fmt(lo);
    std::string s = detail::fmt(lo) + ":" + detail::fmt(hi);
    if (step != 1.0) s += ":" + detail::fmt(step);
    return s;
  }

  bool is_range() const { return lo != hi; }

  /// Throws InvalidArgument for non-half-integer members.
  std::vector<SpinJ> values() const {
    std::vector<SpinJ> out;
    if (!(step > 0.0) || hi < lo) return out;
    const auto n = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::int64_t i = 0; i < n; ++i)
      out.push_back(SpinJ::from_double(lo + step * static_cast<double>(i)));
    return out;
  }
};

struct RunConfig {
  std::string subcommand;
  KappaSpec kappa;
  double p = kHalfPi;
  double tau = 1.0;
  JSpec j;
  std::int64_t L = 50;
  std::string kicks = "150";
  std::int64_t n_init = 1360;
  std::string orbit = "FP1";
  std::int64_t period = 1;
  std::int64_t seed_grid = 40;
  std::int64_t grid = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double theta = std::numeric_limits<double>::quiet_NaN();
  double phi = std::numeric_limits<double>::quiet_NaN();
  bool average = false;
  bool per_kick = false;
  bool integer_j = true;
  std::string partners = "none";
  bool binary = false;
  std::string output = "out";

  /// Defaults that differ between subcommands.
  static RunConfig defaults_for(std::string_view sub) {
    RunConfig c;
    c.subcommand = std::string(sub);
    if (sub == "husimi") {
      c.kicks = "0:8";
      c.j = JSpec::parse("20");
      c.kappa = KappaSpec::parse("1.5");
      c.orbit = "P4";
    } else if (sub == "bifurcation") {
      c.kappa = KappaSpec::parse("1:3:2001");
    } else if (sub == "heatmap") {
      c.j = JSpec::parse("1:50");
      c.kappa = KappaSpec::parse("1:3:41");
    } else if (sub == "criteria") {
      c.kappa = KappaSpec::parse("1.5");
      c.orbit = "P4";
    }
    return c;
  }
};

struct FieldSpec {
  std::string key;
  std::string help;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

inline const std::vector<FieldSpec>& fields() {
  using detail::fmt;
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  static const std::vector<FieldSpec> f{
      {"kappa", "kick strength: value or start:end:count",
       [](const RunConfig& c) { return c.kappa.str(); },
       [](RunConfig& c, std::string_view s) { c.kappa = KappaSpec::parse(s); }},
      {"p", "rotation angle (radians, or pi/2)", [](const RunConfig& c) { return fmt(c.p); },
       [](RunConfig& c, std::string_view s) { c.p = parse_double("p", s); }},
      {"tau", "kick period", [](const RunConfig& c) { return fmt(c.tau); },
       [](RunConfig& c, std::string_view s) { c.tau = parse_double("tau", s); }},
      {"j", "spin: value or lo:hi[:step]", [](const RunConfig& c) { return c.j.str(); },
       [](RunConfig& c, std::string_view s) { c.j = JSpec::parse(s); }},
      {"L", "number of averaged survival terms",
       [](const RunConfig& c) { return std::to_string(c.L); },
       [](RunConfig& c, std::string_view s) { c.L = parse_int("L", s); }},
      {"kicks", "kick count, or kick list a,b,c / range a:b",
       [](const RunConfig& c) { return c.kicks; },
       [](RunConfig& c, std::string_view s) { c.kicks = detail::trim(s); }},
      {"n-init", "number of initial conditions",
       [](const RunConfig& c) { return std::to_string(c.n_init); },
       [](RunConfig& c, std::string_view s) { c.n_init = parse_int("n-init", s); }},
      {"orbit", "catalog orbit label (FP1..FP4, P2A..P2E, P4) or POINT",
       [](const RunConfig& c) { return c.orbit; },
       [](RunConfig& c, std::string_view s) { c.orbit = detail::trim(s); }},
      {"period", "orbit period for the Newton search",
       [](const RunConfig& c) { return std::to_string(c.period); },
       [](RunConfig& c, std::string_view s) { c.period = parse_int("period", s); }},
      {"seed-grid", "Newton seeds per angular direction (N x N grid)",
       [](const RunConfig& c) { return std::to_string(c.seed_grid); },
       [](RunConfig& c, std::string_view s) { c.seed_grid = parse_int("seed-grid", s); }},
      {"grid", "Husimi theta nodes (0 = max(64, 2j+2)); phi nodes are twice this",
       [](const RunConfig& c) { return std::to_string(c.grid); },
       [](RunConfig& c, std::string_view s) { c.grid = parse_int("grid", s); }},
      {"epsilon", "orthogonality threshold (0 = family default)",
       [](const RunConfig& c) { return fmt(c.epsilon); },
       [](RunConfig& c, std::string_view s) { c.epsilon = parse_double("epsilon", s); }},
      {"seed", "lattice rotation seed for initial conditions",
       [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, std::string_view s) {
         const auto v = parse_int("seed", s);
         if (v < 0) throw ConfigError("seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(v);
       }},
      {"theta", "polar angle of the initial point (orbit=POINT)",
       [](const RunConfig& c) { return std::isnan(c.theta) ? std::string("none") : fmt(c.theta); },
       [](RunConfig& c, std::string_view s) {
         c.theta = detail::trim(s) == "none" ? std::numeric_limits<double>::quiet_NaN()
                                             : parse_double("theta", s);
       }},
      {"phi", "azimuth of the initial point (orbit=POINT)",
       [](const RunConfig& c) { return std::isnan(c.phi) ? std::string("none") : fmt(c.phi); },
       [](RunConfig& c, std::string_view s) {
         c.phi = detail::trim(s) == "none" ? std::numeric_limits<double>::quiet_NaN()
                                           : parse_double("phi", s);
       }},
      {"average", "emit the kick-averaged Husimi distribution",
       [b](const RunConfig& c) { return b(c.average); },
       [](RunConfig& c, std::string_view s) { c.average = parse_bool("average", s); }},
      {"per-kick", "append per-kick survival terms",
       [b](const RunConfig& c) { return b(c.per_kick); },
       [](RunConfig& c, std::string_view s) { c.per_kick = parse_bool("per-kick", s); }},
      {"integer-j", "restrict j grids and j_min to integers",
       [b](const RunConfig& c) { return b(c.integer_j); },
       [](RunConfig& c, std::string_view s) { c.integer_j = parse_bool("integer-j", s); }},
      {"partners", "criterion-2 partners: none, auto, or labels a,b",
       [](const RunConfig& c) { return c.partners; },
       [](RunConfig& c, std::string_view s) { c.partners = detail::trim(s); }},
      {"binary", "also write binary Husimi grids",
       [b](const RunConfig& c) { return b(c.binary); },
       [](RunConfig& c, std::string_view s) { c.binary = parse_bool("binary", s); }},
      {"output", "output directory", [](const RunConfig& c) { return c.output; },
       [](RunConfig& c, std::string_view s) { c.output = detail::trim(s); }},
  };
  return f;
}

inline const FieldSpec& field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

/// Keys each subcommand reads, in serialization order.
inline std::vector<std::string> keys_for(std::string_view sub) {
  if (sub == "phase-portrait") return {"kappa", "p", "tau", "n-init", "kicks", "seed", "output"};
  if (sub == "bifurcation") return {"orbit", "kappa", "p", "output"};
  if (sub == "catalog") return {"kappa", "p", "output"};
  if (sub == "husimi")
    return {"orbit", "theta", "phi", "j", "kappa", "p", "tau", "kicks", "average", "grid",
            "binary", "output"};
  if (sub == "survival")
    return {"orbit", "theta", "phi", "j", "kappa", "p", "tau", "L", "per-kick", "output"};
  if (sub == "heatmap")
    return {"orbit", "j", "kappa", "L", "p", "tau", "epsilon", "integer-j", "output"};
  if (sub == "criteria")
    return {"orbit", "kappa", "p", "j", "epsilon", "partners", "integer-j", "output"};
  if (sub == "find-orbits") return {"period", "kappa", "p", "seed-grid", "output"};
  throw ConfigError("unknown subcommand '" + std::string(sub) + "'");
}

/// Canonical key=value text of a configuration.
inline std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  os << "subcommand=" << c.subcommand << '\n';
  for (const auto& k : keys_for(c.subcommand)) os << k << '=' << field(k).get(c) << '\n';
  return os.str();
}

/// Parses key=value lines ('#' starts a comment line). Keys not read by the
/// subcommand are rejected.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
    out.emplace_back(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  return out;
}

/// Configuration from key=value text. If the text carries no subcommand,
/// fallback_subcommand is used.
inline RunConfig parse_config(std::istream& is, std::string_view fallback_subcommand = {}) {
  const auto kv = parse_key_values(is);
  std::string sub(fallback_subcommand);
  for (const auto& [k, v] : kv)
    if (k == "subcommand") sub = v;
  if (sub.empty()) throw ConfigError("configuration names no subcommand");
  if (std::find(subcommands().begin(), subcommands().end(), sub) == subcommands().end())
    throw ConfigError("unknown subcommand '" + sub + "'");
  RunConfig c = RunConfig::defaults_for(sub);
  const auto keys = keys_for(sub);
  for (const auto& [k, v] : kv) {
    if (k == "subcommand") continue;
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw ConfigError("key '" + k + "' is not used by " + sub);
    field(k).set(c, v);
  }
  return c;
}

inline RunConfig parse_config(std::string_view text, std::string_view fallback_subcommand = {}) {
  std::istringstream is{std::string(text)};
  return parse_config(is, fallback_subcommand);
}

// ---------------------------------------------------------------------------
// Validation

enum class Severity { Info, Warning, Error };

struct Diagnostic {
  Severity severity;
  std::string message;
};

inline std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Info: return "info";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
  }
  return "info";
}

inline bool has_errors(const std::vector<Diagnostic>& d) {
  return std::any_of(d.begin(), d.end(), [](const auto& x) { return x.severity == Severity::Error; });
}

/// Parses the kicks field as a sorted list (a,b,c or a:b inclusive).
inline std::vector<std::size_t> kick_list(const std::string& s) {
  std::vector<std::size_t> out;
  if (s.find(':') != std::string::npos) {
    const auto parts = detail::split(s, ':');
    if (parts.size() != 2) throw ConfigError("kick range expects a:b");
    const auto a = detail::parse_int("kicks", parts[0]);
    const auto b = detail::parse_int("kicks", parts[1]);
    if (a < 0 || b < a) throw ConfigError("kick range must satisfy 0 <= a <= b");
    for (auto k = a; k <= b; ++k) out.push_back(static_cast<std::size_t>(k));
    return out;
  }
  for (const auto& p : detail::split(s, ',')) {
    const auto v = detail::parse_int("kicks", p);
    if (v < 0) throw ConfigError("kicks must be nonnegative");
    out.push_back(static_cast<std::size_t>(v));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline std::string mib(double bytes) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << bytes / (1024.0 * 1024.0) << " MiB";
  return os.str();
}

}  // namespace detail

/// Range checks, orbit-existence warnings and a resource estimate. Never
/// throws; run() refuses configurations with Error diagnostics.
inline std::vector<Diagnostic> validate_config(const RunConfig& c) {
  std::vector<Diagnostic> d;
  auto error = [&](std::string m) { d.push_back({Severity::Error, std::move(m)}); };
  auto warn = [&](std::string m) { d.push_back({Severity::Warning, std::move(m)}); };
  auto info = [&](std::string m) { d.push_back({Severity::Info, std::move(m)}); };

  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), c.subcommand) == subs.end()) {
    error("unknown subcommand '" + c.subcommand + "'");
    return d;
  }
  const auto keys = keys_for(c.subcommand);
  auto uses = [&](std::string_view k) { return std::find(keys.begin(), keys.end(), k) != keys.end(); };
  const bool classical = c.subcommand == "phase-portrait" || c.subcommand == "bifurcation" ||
                         c.subcommand == "catalog" || c.subcommand == "find-orbits" ||
                         c.subcommand == "criteria" || c.subcommand == "heatmap";
  const bool quantum = c.subcommand == "husimi" || c.subcommand == "survival" ||
                       c.subcommand == "heatmap";

  // kappa
  std::vector<double> kappas;
  if (c.kappa.count < 1) error("kappa count must be >= 1");
  else kappas = c.kappa.values();
  for (double k : kappas)
    if (!(k >= 0.0) || !std::isfinite(k)) {
      error("kappa must be >= 0");
      break;
    }
  if (c.subcommand == "bifurcation" && (c.kappa.count < 2 || !(c.kappa.end > c.kappa.start)))
    error("bifurcation needs a kappa range start:end:count with start < end and count >= 2");
  if (!(c.tau > 0.0)) error("tau must be > 0");
  if (uses("p") && classical && std::abs(c.p - kHalfPi) > 1e-12)
    error("classical analysis is implemented for p = pi/2 only");
  if (uses("tau") && quantum && c.tau != 1.0)
    warn("quantum runs in the reference setup use tau = 1");

  // j
  std::vector<SpinJ> js;
  if (uses("j")) {
    if (!(c.j.step > 0.0) || c.j.hi < c.j.lo) error("j range must satisfy lo <= hi and step > 0");
    else {
      try {
        js = c.j.values();
      } catch (const InvalidArgument&) {
        error("j must be a nonnegative half-integer (2j integer)");
      }
    }
    if (quantum)
      for (SpinJ j : js)
        if (j.twice() == 0) {
          error("quantum evolution needs j >= 1/2");
          break;
        }
    if (c.integer_j && uses("integer-j"))
      for (SpinJ j : js)
        if (!j.is_integer()) {
          warn("j = " + detail::fmt(j.value()) + " is half-integer but integer-j is set");
          break;
        }
    if (c.subcommand == "husimi" || c.subcommand == "survival")
      if (js.size() > 1 && c.subcommand == "husimi") error("husimi takes a single j");
    if (c.subcommand == "survival" && js.size() > 1 && c.kappa.is_range())
      error("survival scans either j or kappa; use heatmap for both");
  }
  if (uses("L") && c.L < 1) error("L must be >= 1");
  if (uses("n-init") && c.n_init < 1) error("n-init must be >= 1");
  if (uses("period") && c.period < 1) error("period must be >= 1");
  if (uses("seed-grid") && c.seed_grid < 1) error("seed-grid must be >= 1");
  if (uses("grid") && c.grid < 0) error("grid must be >= 0");
  if (uses("epsilon") && !(c.epsilon == 0.0 || (c.epsilon > 0.0 && c.epsilon < 1.0)))
    error("epsilon must lie in (0, 1), or 0 for the family default");
  if (uses("kicks")) {
    try {
      const auto ks = kick_list(c.kicks);
      if (c.subcommand == "phase-portrait" && ks.size() != 1)
        error("phase-portrait takes a single kick count");
      if (c.subcommand == "husimi" && c.average && (ks.size() != 1 || ks[0] < 1))
        error("husimi --average takes a single kick count >= 1");
    } catch (const ConfigError& e) {
      error(e.what());
    }
  }

  // orbit
  std::optional<OrbitLabel> label;
  if (uses("orbit")) {
    const bool point_ok = c.subcommand == "husimi" || c.subcommand == "survival";
    if (c.orbit == "POINT") {
      if (!point_ok) error("orbit=POINT is only valid for husimi and survival");
      if (std::isnan(c.theta) || std::isnan(c.phi)) error("orbit=POINT needs theta and phi");
    } else {
      try {
        label = parse_orbit_label(c.orbit);
        if (*label == OrbitLabel::Numeric) error("orbit must be a catalog label");
      } catch (const InvalidArgument& e) {
        error(e.what());
      }
    }
  }
  if (label && *label != OrbitLabel::Numeric && !kappas.empty()) {
    std::size_t absent = 0;
    std::string reason;
    for (double k : kappas) {
      const auto r = catalog_absence_reason(*label, k);
      if (!r.empty()) {
        ++absent;
        reason = r;
      }
    }
    if (absent == kappas.size())
      warn(std::string(kicktop::to_string(*label)) + ": " + reason + " (no kappa value in range)");
    else if (absent > 0)
      warn(std::string(kicktop::to_string(*label)) + ": " + reason + " (" +
           std::to_string(absent) + " of " + std::to_string(kappas.size()) +
           " kappa values marked missing)");
  }
  if (uses("partners") && c.partners != "none" && c.partners != "auto") {
    for (const auto& p : detail::split(c.partners, ',')) {
      try {
        if (parse_orbit_label(p) == OrbitLabel::Numeric) error("partners must be catalog labels");
      } catch (const InvalidArgument& e) {
        error(e.what());
      }
    }
  }

  // Resource estimate for dense spin operators.
  if (!js.empty() && quantum) {
    const SpinJ jmax = *std::max_element(js.begin(), js.end());
    const double n = static_cast<double>(jmax.dim());
    const std::size_t dim = static_cast<std::size_t>(jmax.dim());
    double kicks_total = 0.0;
    if (c.subcommand == "survival" || c.subcommand == "heatmap") {
      const int period = label ? std::max(1, catalog_period(*label)) : 1;
      kicks_total = static_cast<double>(c.L) * period * static_cast<double>(kappas.size()) *
                    static_cast<double>(js.size());
    }
    const double seconds = kicks_total * n * n * 1.2e-9 + 2.5e-9 * n * n * n * static_cast<double>(js.size());
    std::ostringstream os;
    os << "estimate: dense operator " << dim << "x" << dim << " complex entries ("
       << detail::mib(n * n * 16.0) << " as complex, rotation factor stored real "
       << detail::mib(n * n * 8.0) << "); ~" << static_cast<long long>(seconds + 0.5)
       << " s single-threaded";
    info(os.str());
  }
  return d;
}

}  // namespace kicktop::cli
