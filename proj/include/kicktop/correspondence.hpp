#pragma once

// Orthogonality criteria for quantum-classical correspondence near periodic
// orbits, the minimum spin meeting them, and (j, kappa) survival scans.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kicktop/classical.hpp"
#include "kicktop/floquet.hpp"
#include "kicktop/parallel.hpp"
#include "kicktop/spin.hpp"

namespace kicktop {

/// Coherent-state overlaps among an orbit's points (criterion 1) and between
/// them and the points of symmetry-partner orbits (criterion 2).
struct CriteriaReport {
  std::string label;
  SpinJ j;
  double epsilon = 0.0;
  /// Points in order: the orbit's, then each partner's.
  std::vector<ClassicalState> points;
  /// Index of the orbit each point came from (0 = the orbit itself).
  std::vector<int> owner;
  Eigen::MatrixXd pairwise_overlaps;
  double max_within_orbit = 0.0;
  double max_with_partners = 0.0;
  bool satisfied = false;
};

namespace detail {

inline std::vector<ClassicalState> collect_points(
    const PeriodicOrbit& orbit, const std::vector<PeriodicOrbit>& partners,
    std::vector<int>* owner = nullptr) {
  std::vector<ClassicalState> pts(orbit.points);
  if (owner) owner->assign(pts.size(), 0);
  for (std::size_t p = 0; p < partners.size(); ++p) {
    for (const auto& q : partners[p].points) {
      pts.push_back(q);
      if (owner) owner->push_back(static_cast<int>(p) + 1);
    }
  }
  return pts;
}

}  // namespace detail

inline CriteriaReport criteria_report(const PeriodicOrbit& orbit,
                                      const std::vector<PeriodicOrbit>& partners,
                                      SpinJ j, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  CriteriaReport r;
  r.label = std::string(to_string(orbit.label));
  r.j = j;
  r.epsilon = epsilon;
  r.points = detail::collect_points(orbit, partners, &r.owner);
  const auto n = static_cast<Eigen::Index>(r.points.size());
  r.pairwise_overlaps = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double ov = overlap_analytic(r.points[static_cast<std::size_t>(a)].vec(),
                                         r.points[static_cast<std::size_t>(b)].vec(), j);
      r.pairwise_overlaps(a, b) = r.pairwise_overlaps(b, a) = ov;
      const bool within = r.owner[static_cast<std::size_t>(a)] == 0 &&
                          r.owner[static_cast<std::size_t>(b)] == 0;
      if (within)
        r.max_within_orbit = std::max(r.max_within_orbit, ov);
      else
        r.max_with_partners = std::max(r.max_with_partners, ov);
    }
  }
  r.satisfied = std::max(r.max_within_orbit, r.max_with_partners) <= epsilon;
  return r;
}

/// Smallest great-circle angle between any two listed points.
inline double min_pair_angle(const std::vector<ClassicalState>& pts) {
  double best = std::numbers::pi;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      best = std::min(best, great_circle_angle(pts[a].vec(), pts[b].vec()));
  return best;
}

/// Largest pairwise coherent-state overlap among the points at spin j.
inline double max_pair_overlap(const std::vector<ClassicalState>& pts, SpinJ j) {
  double worst = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      worst = std::max(worst, overlap_analytic(pts[a].vec(), pts[b].vec(), j));
  return worst;
}

/// Smallest j (half-integer, or integer when integer_only) for which every
/// pairwise overlap is <= epsilon. Since the largest overlap is
/// [cos(chi_min/2)]^{2j}, 2j = ceil(ln eps / ln cos(chi_min/2)); the result is
/// then nudged against the direct overlap evaluation to absorb roundoff.
inline SpinJ min_j_for_orthogonality(const std::vector<ClassicalState>& pts,
                                     double epsilon, bool integer_only = false) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  const int step = integer_only ? 2 : 1;
  const int smallest = integer_only ? 2 : 1;
  if (pts.size() < 2) return SpinJ::from_twice(smallest);

  double c_max = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      c_max = std::max(c_max, half_angle_cosine(pts[a].vec(), pts[b].vec()));
  if (c_max >= 1.0 - 1e-15)
    throw NoFiniteJ("two distinct points coincide; their coherent states never become orthogonal");
  if (c_max == 0.0) return SpinJ::from_twice(smallest);

  const double ratio = std::log(epsilon) / std::log(c_max);
  if (!(ratio < 2e8)) throw NoFiniteJ("required j exceeds the supported range");
  int twice = std::max(smallest, static_cast<int>(std::ceil(ratio)));
  if (integer_only && twice % 2 == 1) ++twice;

  auto ok = [&](int tj) { return max_pair_overlap(pts, SpinJ::from_twice(tj)) <= epsilon; };
  while (twice - step >= smallest && ok(twice - step)) twice -= step;
  while (!ok(twice)) twice += step;
  return SpinJ::from_twice(twice);
}

inline SpinJ min_j_for_orthogonality(const PeriodicOrbit& orbit,
                                     const std::vector<PeriodicOrbit>& partners,
                                     double epsilon, bool integer_only = false) {
  return min_j_for_orthogonality(detail::collect_points(orbit, partners), epsilon,
                                 integer_only);
}

/// Catalog orbits holding the images of an orbit's points under the pi
/// rotation about x (excluding the orbit itself).
inline std::vector<PeriodicOrbit> rx_symmetry_partners(const PeriodicOrbit& orbit,
                                                       const OrbitCatalog& catalog,
                                                       double tol = kClosureTolerance) {
  std::vector<PeriodicOrbit> out;
  for (const auto& candidate : catalog.orbits) {
    if (candidate.label == orbit.label) continue;
    bool hit = false;
    for (const auto& p : orbit.points) {
      const ClassicalState img = rotate_pi_about_x(p);
      for (const auto& q : candidate.points)
        if (img.max_abs_diff(q) <= tol) hit = true;
    }
    if (hit) out.push_back(candidate);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Survival scans

struct SurvivalGrid {
  std::string label;
  int L = 0;
  int period = 1;
  std::vector<SpinJ> j_values;
  std::vector<double> kappa_values;
  /// S(j_index, kappa_index); NaN where the orbit does not exist.
  Eigen::MatrixXd S;
  std::optional<double> classical_bifurcation_kappa;
  double orthogonality_threshold = 0.0;
  /// Per kappa: smallest j with max pairwise overlap <= threshold.
  std::vector<std::optional<SpinJ>> orthogonality_curve;

  bool missing(Eigen::Index ji, Eigen::Index ki) const { return std::isnan(S(ji, ki)); }
};

/// Kappa where a catalog orbit loses stability, when known in closed form or
/// by the stated numerical value.
inline std::optional<double> known_bifurcation_kappa(OrbitLabel label) {
  switch (label) {
    case OrbitLabel::FP1:
    case OrbitLabel::FP2: return 2.0;
    case OrbitLabel::P4: return std::numbers::pi;
    case OrbitLabel::FP3:
    case OrbitLabel::FP4:
    case OrbitLabel::P2A: return std::numbers::sqrt2 * std::numbers::pi;
    default: return std::nullopt;
  }
}

/// Default orthogonality threshold per family: 1e-8 for P4, 1e-10 otherwise.
inline double default_orthogonality_threshold(OrbitLabel label) {
  return label == OrbitLabel::P4 ? 1e-8 : 1e-10;
}

struct HeatmapOptions {
  KickedTopParams base{};
  std::optional<double> orthogonality_threshold;
  bool integer_j_curve = true;
  /// Refine the bifurcation annotation with a stability scan over the
  /// kappa range when no closed form is known.
  bool scan_bifurcation = true;
};

/// S(L) for the family's coherent state over a (j, kappa) lattice. Cells where
/// the orbit does not exist are NaN. Rotation factors are shared per j.
inline SurvivalGrid survival_heatmap(OrbitLabel family, const std::vector<SpinJ>& j_values,
                                     const std::vector<double>& kappa_values, int L,
                                     const HeatmapOptions& opt = {},
                                     RotationCache* cache = nullptr) {
  detail::require_half_pi(opt.base);
  if (family == OrbitLabel::Numeric) throw InvalidArgument("heatmap needs a catalog family");
  if (L < 1) throw InvalidArgument("L must be >= 1");
  if (j_values.empty() || kappa_values.empty()) throw InvalidArgument("empty scan grid");
  for (SpinJ j : j_values)
    if (j.twice() == 0) throw InvalidArgument("scan needs j >= 1/2");

  SurvivalGrid g;
  g.label = std::string(to_string(family));
  g.L = L;
  g.period = catalog_period(family);
  g.j_values = j_values;
  g.kappa_values = kappa_values;
  g.orthogonality_threshold =
      opt.orthogonality_threshold.value_or(default_orthogonality_threshold(family));
  const auto nj = static_cast<Eigen::Index>(j_values.size());
  const auto nk = static_cast<Eigen::Index>(kappa_values.size());
  g.S = Eigen::MatrixXd::Constant(nj, nk, std::numeric_limits<double>::quiet_NaN());

  std::vector<std::optional<PeriodicOrbit>> orbits(kappa_values.size());
  g.orthogonality_curve.resize(kappa_values.size());
  for (std::size_t ki = 0; ki < kappa_values.size(); ++ki) {
    KickedTopParams params = opt.base;
    params.kappa = kappa_values[ki];
    orbits[ki] = catalog_orbit_points(family, params);
    if (!orbits[ki]) continue;
    try {
      g.orthogonality_curve[ki] = min_j_for_orthogonality(
          orbits[ki]->points, g.orthogonality_threshold, opt.integer_j_curve);
    } catch (const NoFiniteJ&) {
    }
  }

  g.classical_bifurcation_kappa = known_bifurcation_kappa(family);
  if (!g.classical_bifurcation_kappa && opt.scan_bifurcation && kappa_values.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(kappa_values.begin(), kappa_values.end());
    if (*hi > *lo)
      g.classical_bifurcation_kappa =
          bifurcation_scan(family, *lo, *hi, 200, opt.base).crossing;
  }

  RotationCache local;
  RotationCache& rc = cache ? *cache : local;
  for (Eigen::Index ji = 0; ji < nj; ++ji) {
    const SpinJ j = j_values[static_cast<std::size_t>(ji)];
    parallel_for(kappa_values.size(), [&](std::size_t ki) {
      if (!orbits[ki]) return;
      KickedTopParams params = opt.base;
      params.kappa = kappa_values[ki];
      g.S(ji, static_cast<Eigen::Index>(ki)) =
          survival_period_n(*orbits[ki], j, params, L, false, &rc).S;
    });
  }
  return g;
}

/// S versus kappa at one j.
inline SurvivalGrid survival_slice(OrbitLabel family, SpinJ j,
                                   const std::vector<double>& kappa_values, int L,
                                   const HeatmapOptions& opt = {},
                                   RotationCache* cache = nullptr) {
  return survival_heatmap(family, {j}, kappa_values, L, opt, cache);
}

/// Integer j grid [lo, hi].
inline std::vector<SpinJ> integer_j_range(int lo, int hi) {
  std::vector<SpinJ> out;
  for (int j = lo; j <= hi; ++j) out.push_back(SpinJ::from_twice(2 * j));
  return out;
}

}  // namespace kicktop
