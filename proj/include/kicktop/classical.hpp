#pragma once

// Classical kicked top at p = pi/2: the stroboscopic map on the unit sphere,
// its Jacobian, the analytic orbit catalog and stability/bifurcation tools.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kicktop/errors.hpp"
#include "kicktop/parallel.hpp"
#include "kicktop/sphere.hpp"

namespace kicktop {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kClosureTolerance = 1e-10;
inline constexpr double kStabilityTolerance = 1e-9;

/// Kick strength, rotation angle and period of the top.
struct KickedTopParams {
  double kappa = 0.0;
  double p = kHalfPi;
  double tau = 1.0;

  void validate() const {
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
      throw InvalidArgument("kappa must be finite and >= 0");
    if (!(tau > 0.0) || !std::isfinite(tau))
      throw InvalidArgument("tau must be finite and > 0");
    if (!std::isfinite(p)) throw InvalidArgument("p must be finite");
  }

  bool is_half_pi() const { return std::abs(p - kHalfPi) <= 1e-12; }
};

/// Unit spin vector (X, Y, Z) = J / j of the classical top.
class ClassicalState {
 public:
  ClassicalState() : v_{0.0, 0.0, 1.0} {}

  /// Throws unless x^2 + y^2 + z^2 = 1 within 1e-12.
  ClassicalState(double x, double y, double z) : v_{x, y, z} {
    if (!(std::abs(dot(v_, v_) - 1.0) <= kNormTolerance))
      throw InvalidArgument("ClassicalState must lie on the unit sphere");
  }

  static ClassicalState normalized(double x, double y, double z) {
    const double n = std::sqrt(x * x + y * y + z * z);
    if (!(n > 0.0) || !std::isfinite(n))
      throw InvalidArgument("cannot normalize a zero or non-finite vector");
    return ClassicalState(x / n, y / n, z / n);
  }

  static ClassicalState from_spherical(const SphericalPoint& p) {
    const Vec3 c = p.cartesian();
    return normalized(c[0], c[1], c[2]);
  }

  double x() const { return v_[0]; }
  double y() const { return v_[1]; }
  double z() const { return v_[2]; }
  const Vec3& vec() const { return v_; }
  SphericalPoint spherical() const { return SphericalPoint::from_cartesian(v_); }

  double distance(const ClassicalState& o) const {
    return std::hypot(x() - o.x(), y() - o.y(), z() - o.z());
  }
  double max_abs_diff(const ClassicalState& o) const {
    return std::max({std::abs(x() - o.x()), std::abs(y() - o.y()),
                     std::abs(z() - o.z())});
  }

 private:
  Vec3 v_;
};

enum class OrbitLabel : std::uint8_t {
  FP1, FP2, FP3, FP4, P2A, P2B, P2C, P2D, P2E, P4, Numeric
};

inline constexpr std::array<OrbitLabel, 10> kCatalogLabels{
    OrbitLabel::FP1, OrbitLabel::FP2, OrbitLabel::FP3, OrbitLabel::FP4,
    OrbitLabel::P2A, OrbitLabel::P2B, OrbitLabel::P2C, OrbitLabel::P2D,
    OrbitLabel::P2E, OrbitLabel::P4};

inline std::string_view to_string(OrbitLabel l) {
  switch (l) {
    case OrbitLabel::FP1: return "FP1";
    case OrbitLabel::FP2: return "FP2";
    case OrbitLabel::FP3: return "FP3";
    case OrbitLabel::FP4: return "FP4";
    case OrbitLabel::P2A: return "P2A";
    case OrbitLabel::P2B: return "P2B";
    case OrbitLabel::P2C: return "P2C";
    case OrbitLabel::P2D: return "P2D";
    case OrbitLabel::P2E: return "P2E";
    case OrbitLabel::P4: return "P4";
    case OrbitLabel::Numeric: return "NUMERIC";
  }
  return "NUMERIC";
}

inline OrbitLabel parse_orbit_label(std::string_view s) {
  for (OrbitLabel l : kCatalogLabels)
    if (to_string(l) == s) return l;
  if (s == "NUMERIC") return OrbitLabel::Numeric;
  throw InvalidArgument("unknown orbit label '" + std::string(s) + "'");
}

inline int catalog_period(OrbitLabel l) {
  switch (l) {
    case OrbitLabel::FP1:
    case OrbitLabel::FP2:
    case OrbitLabel::FP3:
    case OrbitLabel::FP4: return 1;
    case OrbitLabel::P4: return 4;
    case OrbitLabel::Numeric: return 0;
    default: return 2;
  }
}

using StabilitySpectrum = std::array<std::complex<double>, 3>;

inline double max_modulus(const StabilitySpectrum& s) {
  return std::max({std::abs(s[0]), std::abs(s[1]), std::abs(s[2])});
}

struct PeriodicOrbit {
  std::vector<ClassicalState> points;
  int period = 0;
  OrbitLabel label = OrbitLabel::Numeric;
  StabilitySpectrum stability_eigenvalues{};
  bool is_stable = false;
};

namespace detail {

inline void require_half_pi(const KickedTopParams& params) {
  params.validate();
  if (!params.is_half_pi())
    throw InvalidArgument("the classical map is implemented for p = pi/2 only");
}

inline ClassicalState step_unchecked(const ClassicalState& s, double kappa) {
  const double c = std::cos(kappa * s.x());
  const double sn = std::sin(kappa * s.x());
  double x = s.z() * c + s.y() * sn;
  double y = -s.z() * sn + s.y() * c;
  double z = -s.x();
  const double n2 = x * x + y * y + z * z;
  if (std::abs(n2 - 1.0) > kNormTolerance) {
    const double n = std::sqrt(n2);
    x /= n;
    y /= n;
    z /= n;
  }
  return ClassicalState::normalized(x, y, z);
}

}  // namespace detail

/// One kick of the p = pi/2 map:
/// (X, Y, Z) -> (Z cos kX + Y sin kX, -Z sin kX + Y cos kX, -X).
inline ClassicalState step(const ClassicalState& s,
                           const KickedTopParams& params) {
  detail::require_half_pi(params);
  return detail::step_unchecked(s, params.kappa);
}

inline ClassicalState iterate(ClassicalState s, const KickedTopParams& params,
                              int n) {
  detail::require_half_pi(params);
  for (int i = 0; i < n; ++i) s = detail::step_unchecked(s, params.kappa);
  return s;
}

inline std::vector<ClassicalState> trajectory(const ClassicalState& s,
                                              const KickedTopParams& params,
                                              std::size_t n_kicks) {
  detail::require_half_pi(params);
  std::vector<ClassicalState> out;
  out.reserve(n_kicks + 1);
  out.push_back(s);
  for (std::size_t k = 0; k < n_kicks; ++k)
    out.push_back(detail::step_unchecked(out.back(), params.kappa));
  return out;
}

struct EnsembleSample {
  std::size_t trajectory = 0;
  std::size_t kick = 0;  // 1-based: sample after this many kicks
  SphericalPoint point;
};

/// Fibonacci-lattice initial condition i of n on the sphere. The seed rotates
/// the lattice about z by seed golden angles.
inline ClassicalState fibonacci_point(std::size_t i, std::size_t n,
                                      std::uint64_t seed = 0) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) /
                             static_cast<double>(n);
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = golden * static_cast<double>(i) +
                     golden * static_cast<double>(seed % 1000003u);
  return ClassicalState::normalized(rho * std::cos(phi), rho * std::sin(phi), z);
}

/// Phase-portrait data: every initial condition evolved for n_kicks, one
/// sample per kick (the initial points themselves are not emitted).
inline std::vector<EnsembleSample> stroboscopic_ensemble(
    std::size_t n_initial, std::size_t n_kicks, const KickedTopParams& params,
    std::uint64_t seed = 0) {
  detail::require_half_pi(params);
  if (n_initial < 1) throw InvalidArgument("n_initial must be >= 1");
  std::vector<EnsembleSample> out(n_initial * n_kicks);
  parallel_for(n_initial, [&](std::size_t i) {
    ClassicalState s = fibonacci_point(i, n_initial, seed);
    for (std::size_t k = 0; k < n_kicks; ++k) {
      s = detail::step_unchecked(s, params.kappa);
      out[i * n_kicks + k] = {i, k + 1, s.spherical()};
    }
  });
  return out;
}

/// Analytic derivative of the map (as a function on R^3) at s.
inline Eigen::Matrix3d jacobian(const ClassicalState& s,
                                const KickedTopParams& params) {
  detail::require_half_pi(params);
  const double k = params.kappa;
  const double c = std::cos(k * s.x());
  const double sn = std::sin(k * s.x());
  Eigen::Matrix3d m;
  m << k * (s.y() * c - s.z() * sn), sn, c,
       -k * (s.z() * c + s.y() * sn), c, -sn,
       -1.0, 0.0, 0.0;
  return m;
}

/// Jacobian of F^n at points[0]: J(points[n-1]) ... J(points[0]).
inline Eigen::Matrix3d orbit_jacobian(std::span<const ClassicalState> points,
                                      const KickedTopParams& params) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  for (const auto& s : points) m = jacobian(s, params) * m;
  return m;
}

inline StabilitySpectrum eigenvalues3(const Eigen::Matrix3d& m) {
  Eigen::EigenSolver<Eigen::Matrix3d> es(m, false);
  const auto ev = es.eigenvalues();
  StabilitySpectrum out{ev[0], ev[1], ev[2]};
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    return std::abs(a) > std::abs(b);
  });
  return out;
}

/// Largest per-component mismatch of map(points[i]) against points[i+1 mod n].
inline double closure_defect(std::span<const ClassicalState> points,
                             const KickedTopParams& params) {
  detail::require_half_pi(params);
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto next = detail::step_unchecked(points[i], params.kappa);
    worst = std::max(worst, next.max_abs_diff(points[(i + 1) % points.size()]));
  }
  return worst;
}

/// Eigenvalues of the Jacobian of F^n at points[0]; also fills in the
/// orbit's spectrum and stability flag. Throws ClosureError for point lists
/// that do not close within 1e-10.
inline StabilitySpectrum orbit_stability(PeriodicOrbit& orbit,
                                         const KickedTopParams& params) {
  if (orbit.points.empty()) throw InvalidArgument("empty orbit");
  if (orbit.period != static_cast<int>(orbit.points.size()))
    throw InvalidArgument("orbit period does not match its point count");
  const double defect = closure_defect(orbit.points, params);
  if (!(defect <= kClosureTolerance))
    throw ClosureError(std::string(to_string(orbit.label)) +
                       " does not close under the map (defect " +
                       std::to_string(defect) + ")");
  orbit.stability_eigenvalues = eigenvalues3(orbit_jacobian(orbit.points, params));
  orbit.is_stable = max_modulus(orbit.stability_eigenvalues) <= 1.0 + kStabilityTolerance;
  return orbit.stability_eigenvalues;
}

// ---------------------------------------------------------------------------
// Nontrivial fixed-point coordinate

namespace detail {

// sin(kx) / (1 - cos(kx)) == cot(kx / 2); the half-angle form avoids the
// cancellation in 1 - cos for small kx.
inline double cot_half(double kappa, double x) {
  return 1.0 / std::tan(0.5 * kappa * x);
}

}  // namespace detail

/// Residual of 2 x^2 + [x sin(kx)]^2 / [1 - cos(kx)]^2 - 1.
inline double x0_residual(double kappa, double x) {
  const double r = x * detail::cot_half(kappa, x);
  return 2.0 * x * x + r * r - 1.0;
}

/// Smallest positive root of the normalization condition for FP3/FP4/P2A,
/// i.e. the branch born from FP1 at kappa = 2. Throws NoRoot for kappa <= 2.
inline double solve_x0(double kappa) {
  if (!std::isfinite(kappa) || !(kappa > 2.0))
    throw NoRoot("normalization condition has no nontrivial root for kappa <= 2");
  constexpr int kSubintervals = 1024;
  constexpr double lo_end = 1e-12;
  const double hi_end = std::numbers::sqrt2 / 2.0;
  const double h = (hi_end - lo_end) / kSubintervals;

  double a = lo_end;
  double fa = x0_residual(kappa, a);
  for (int i = 1; i <= kSubintervals; ++i) {
    double b = i == kSubintervals ? hi_end : lo_end + i * h;
    const double fb = x0_residual(kappa, b);
    if (fa < 0.0 && fb >= 0.0) {
      if (fb == 0.0) return b;
      for (int it = 0; it < 200 && b - a > 0.0; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (x0_residual(kappa, mid) < 0.0)
          a = mid;
        else
          b = mid;
      }
      return std::abs(x0_residual(kappa, a)) < std::abs(x0_residual(kappa, b)) ? a : b;
    }
    a = b;
    fa = fb;
  }
  throw NoRoot("no sign change of the normalization residual on (0, 1/sqrt2]");
}

// ---------------------------------------------------------------------------
// Analytic orbit catalog

struct ExistenceEntry {
  OrbitLabel label;
  bool exists = false;
  std::string reason;
};

struct OrbitCatalog {
  std::vector<PeriodicOrbit> orbits;
  std::vector<ExistenceEntry> report;

  const PeriodicOrbit* find(OrbitLabel l) const {
    for (const auto& o : orbits)
      if (o.label == l) return &o;
    return nullptr;
  }
};

/// Existence condition of a catalog entry; empty string if it exists.
inline std::string catalog_absence_reason(OrbitLabel label, double kappa) {
  switch (label) {
    case OrbitLabel::FP3:
    case OrbitLabel::FP4:
    case OrbitLabel::P2A:
      if (!(kappa > 2.0)) return "requires kappa > 2";
      return {};
    case OrbitLabel::P2B:
    case OrbitLabel::P2C:
    case OrbitLabel::P2D:
    case OrbitLabel::P2E:
      if (!(kappa >= std::numbers::sqrt2 * std::numbers::pi))
        return "orbit does not exist below sqrt(2)*pi";
      return {};
    case OrbitLabel::Numeric: return "not a catalog entry";
    default: return {};
  }
}

inline bool catalog_orbit_exists(OrbitLabel label, double kappa) {
  return catalog_absence_reason(label, kappa).empty();
}

namespace detail {

inline PeriodicOrbit make_orbit(OrbitLabel label,
                                std::initializer_list<Vec3> pts) {
  PeriodicOrbit o;
  o.label = label;
  for (const auto& v : pts) o.points.push_back(ClassicalState::normalized(v[0], v[1], v[2]));
  o.period = static_cast<int>(o.points.size());
  return o;
}

}  // namespace detail

/// Points of a catalog orbit at the given parameters (no stability, no
/// closure check), or nullopt when the entry does not exist there.
inline std::optional<PeriodicOrbit> catalog_orbit_points(
    OrbitLabel label, const KickedTopParams& params) {
  detail::require_half_pi(params);
  const double k = params.kappa;
  if (!catalog_orbit_exists(label, k)) return std::nullopt;
  using detail::make_orbit;
  switch (label) {
    case OrbitLabel::FP1: return make_orbit(label, {{0, 1, 0}});
    case OrbitLabel::FP2: return make_orbit(label, {{0, -1, 0}});
    case OrbitLabel::P4:
      return make_orbit(label, {{1, 0, 0}, {0, 0, -1}, {-1, 0, 0}, {0, 0, 1}});
    case OrbitLabel::FP3:
    case OrbitLabel::FP4:
    case OrbitLabel::P2A: {
      const double x0 = solve_x0(k);
      const double y0 = x0 * detail::cot_half(k, x0);
      if (label == OrbitLabel::FP3) return make_orbit(label, {{x0, y0, -x0}});
      if (label == OrbitLabel::FP4) return make_orbit(label, {{-x0, y0, x0}});
      return make_orbit(label, {{x0, -y0, x0}, {-x0, -y0, -x0}});
    }
    default: break;
  }
  const double a = std::numbers::pi / k;
  const double b = std::sqrt(std::max(0.0, 1.0 - 2.0 * a * a));
  switch (label) {
    case OrbitLabel::P2B: return make_orbit(label, {{a, b, a}, {-a, -b, -a}});
    case OrbitLabel::P2C: return make_orbit(label, {{-a, b, a}, {-a, -b, a}});
    case OrbitLabel::P2D: return make_orbit(label, {{a, b, -a}, {a, -b, -a}});
    case OrbitLabel::P2E: return make_orbit(label, {{a, -b, a}, {-a, b, -a}});
    default: return std::nullopt;
  }
}

/// Catalog orbit with stability filled in; nullopt if it does not exist.
inline std::optional<PeriodicOrbit> catalog_orbit(OrbitLabel label,
                                                  const KickedTopParams& params) {
  auto o = catalog_orbit_points(label, params);
  if (o) orbit_stability(*o, params);
  return o;
}

/// Every catalog entry that exists at params.kappa, with stability. Entries
/// whose printed points fail to close are reported and left out.
inline OrbitCatalog orbit_catalog(const KickedTopParams& params) {
  detail::require_half_pi(params);
  OrbitCatalog cat;
  for (OrbitLabel l : kCatalogLabels) {
    ExistenceEntry e{l, false, catalog_absence_reason(l, params.kappa)};
    if (e.reason.empty()) {
      try {
        auto o = catalog_orbit(l, params);
        if (o) {
          cat.orbits.push_back(std::move(*o));
          e.exists = true;
        }
      } catch (const ClosureError& err) {
        e.reason = std::string("closure check failed: ") + err.what();
      }
    }
    cat.report.push_back(std::move(e));
  }
  return cat;
}

// ---------------------------------------------------------------------------
// Stability scans

struct BifurcationScan {
  OrbitLabel label = OrbitLabel::Numeric;
  std::vector<double> kappa_values;
  /// nullopt where the orbit does not exist.
  std::vector<std::optional<double>> max_abs_eigenvalue;
  std::optional<double> crossing;
  std::vector<std::pair<double, double>> missing_ranges;
};

inline std::vector<double> linspace(double start, double end, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = start;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i)
    v[i] = start + (end - start) * static_cast<double>(i) /
                       static_cast<double>(n - 1);
  v.back() = end;
  return v;
}

inline std::optional<double> catalog_max_modulus(OrbitLabel label,
                                                 KickedTopParams params,
                                                 double kappa) {
  params.kappa = kappa;
  auto o = catalog_orbit(label, params);
  if (!o) return std::nullopt;
  return max_modulus(o->stability_eigenvalues);
}

/// max|lambda| of a catalog orbit over a kappa grid. The first change of
/// stability between adjacent grid points is refined by bisection to
/// |dkappa| < 1e-9.
inline BifurcationScan bifurcation_scan(OrbitLabel label, double kappa_min,
                                        double kappa_max, std::size_t n_points,
                                        KickedTopParams base = {}) {
  detail::require_half_pi(base);
  if (label == OrbitLabel::Numeric)
    throw InvalidArgument("bifurcation_scan needs a catalog orbit label");
  if (n_points < 2 || !(kappa_max > kappa_min) || kappa_min < 0.0)
    throw InvalidArgument("bifurcation_scan needs kappa_min < kappa_max and n_points >= 2");

  BifurcationScan scan;
  scan.label = label;
  scan.kappa_values = linspace(kappa_min, kappa_max, n_points);
  scan.max_abs_eigenvalue.resize(n_points);
  parallel_for(n_points, [&](std::size_t i) {
    scan.max_abs_eigenvalue[i] = catalog_max_modulus(label, base, scan.kappa_values[i]);
  });

  for (std::size_t i = 0; i < n_points;) {
    if (scan.max_abs_eigenvalue[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n_points && !scan.max_abs_eigenvalue[j + 1]) ++j;
    scan.missing_ranges.emplace_back(scan.kappa_values[i], scan.kappa_values[j]);
    i = j + 1;
  }

  auto unstable = [](double m) { return m > 1.0 + kStabilityTolerance; };
  for (std::size_t i = 0; i + 1 < n_points; ++i) {
    const auto& a = scan.max_abs_eigenvalue[i];
    const auto& b = scan.max_abs_eigenvalue[i + 1];
    if (!a || !b || unstable(*a) == unstable(*b)) continue;
    double lo = scan.kappa_values[i];
    double hi = scan.kappa_values[i + 1];
    const bool lo_unstable = unstable(*a);
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      const auto m = catalog_max_modulus(label, base, mid);
      if (!m) break;
      if (unstable(*m) == lo_unstable)
        lo = mid;
      else
        hi = mid;
    }
    scan.crossing = 0.5 * (lo + hi);
    break;
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Generic periodic-orbit search

struct OrbitSearchResult {
  std::vector<PeriodicOrbit> orbits;
  std::size_t converged_seeds = 0;
  std::size_t failed_seeds = 0;
  std::size_t divisor_period_seeds = 0;
};

namespace detail {

inline int minimal_period(const ClassicalState& s, int n, double kappa,
                          double tol) {
  ClassicalState t = s;
  for (int d = 1; d <= n; ++d) {
    t = step_unchecked(t, kappa);
    if (n % d == 0 && t.distance(s) < tol) return d;
  }
  return 0;
}

/// Newton on F^n(s) - s restricted to the tangent plane at s.
inline std::optional<ClassicalState> newton_periodic(ClassicalState s, int n,
                                                     const KickedTopParams& params,
                                                     int max_iter = 60) {
  for (int it = 0; it < max_iter; ++it) {
    std::vector<ClassicalState> pts;
    pts.reserve(n);
    pts.push_back(s);
    for (int i = 1; i < n; ++i) pts.push_back(step_unchecked(pts.back(), params.kappa));
    const ClassicalState img = step_unchecked(pts.back(), params.kappa);
    const Eigen::Vector3d g(img.x() - s.x(), img.y() - s.y(), img.z() - s.z());
    if (g.norm() < 1e-13) return s;

    const Eigen::Vector3d r(s.x(), s.y(), s.z());
    const Eigen::Vector3d helper =
        std::abs(r.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d t1 = r.cross(helper).normalized();
    const Eigen::Vector3d t2 = r.cross(t1);
    Eigen::Matrix<double, 3, 2> tangent;
    tangent << t1, t2;

    const Eigen::Matrix3d a = orbit_jacobian(pts, params) - Eigen::Matrix3d::Identity();
    const Eigen::Matrix<double, 3, 2> at = a * tangent;
    Eigen::Vector2d delta = at.colPivHouseholderQr().solve(-g);
    if (!delta.allFinite()) return std::nullopt;
    const double len = delta.norm();
    if (len > 0.5) delta *= 0.5 / len;
    const Eigen::Vector3d next = r + tangent * delta;
    s = ClassicalState::normalized(next.x(), next.y(), next.z());
  }
  return std::nullopt;
}

}  // namespace detail

/// Newton search for period-n orbits from a theta x phi seed grid. Orbits of
/// a smaller period dividing n are dropped; distinct seeds landing on the
/// same cycle are merged.
inline OrbitSearchResult find_periodic_orbits(int period,
                                              const KickedTopParams& params,
                                              std::size_t n_theta = 40,
                                              std::size_t n_phi = 40) {
  detail::require_half_pi(params);
  if (period < 1) throw InvalidArgument("period must be >= 1");
  if (n_theta < 1 || n_phi < 1) throw InvalidArgument("seed grid must be nonempty");

  const std::size_t n_seeds = n_theta * n_phi;
  std::vector<std::optional<ClassicalState>> roots(n_seeds);
  parallel_for(n_seeds, [&](std::size_t idx) {
    const std::size_t it = idx / n_phi;
    const std::size_t ip = idx % n_phi;
    const double theta = std::numbers::pi * (static_cast<double>(it) + 0.5) /
                         static_cast<double>(n_theta);
    const double phi = -std::numbers::pi + 2.0 * std::numbers::pi *
                                               (static_cast<double>(ip) + 0.5) /
                                               static_cast<double>(n_phi);
    roots[idx] = detail::newton_periodic(
        ClassicalState::from_spherical(SphericalPoint(theta, phi)), period, params);
  });

  OrbitSearchResult result;
  constexpr double kSame = 1e-6;
  for (const auto& root : roots) {
    if (!root) {
      ++result.failed_seeds;
      continue;
    }
    ++result.converged_seeds;
    const int minimal = detail::minimal_period(*root, period, params.kappa, 1e-9);
    if (minimal != period) {
      ++result.divisor_period_seeds;
      continue;
    }
    bool seen = false;
    for (const auto& o : result.orbits) {
      for (const auto& q : o.points)
        if (q.distance(*root) < kSame) seen = true;
      if (seen) break;
    }
    if (seen) continue;

    PeriodicOrbit o;
    o.label = OrbitLabel::Numeric;
    o.period = period;
    o.points = trajectory(*root, params, static_cast<std::size_t>(period - 1));
    // Canonical phase: start at the lexicographically largest (x, y, z).
    const auto start = std::max_element(
        o.points.begin(), o.points.end(), [](const auto& a, const auto& b) {
          return a.vec() < b.vec();
        });
    std::rotate(o.points.begin(), start, o.points.end());
    orbit_stability(o, params);
    result.orbits.push_back(std::move(o));
  }
  return result;
}

/// The pi rotation about x, (X, Y, Z) -> (X, -Y, -Z); F^2 commutes with it.
inline ClassicalState rotate_pi_about_x(const ClassicalState& s) {
  return ClassicalState(s.x(), -s.y(), -s.z());
}

}  // namespace kicktop
