#pragma once

// Serialization of scan results and Husimi grids. CSV files start with '#'
// header lines; every float is written with 17 significant digits.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "kicktop/classical.hpp"
#include "kicktop/correspondence.hpp"
#include "kicktop/floquet.hpp"
#include "kicktop/spin.hpp"

namespace kicktop::io {

/// %.17g; "nan" for missing values.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_j(SpinJ j) {
  return j.is_integer() ? std::to_string(j.twice() / 2) : fmt(j.value());
}

inline void write_bifurcation_csv(std::ostream& os, const BifurcationScan& s) {
  os << "# orbit=" << to_string(s.label) << '\n';
  os << "# crossing=" << (s.crossing ? fmt(*s.crossing) : "none") << '\n';
  for (const auto& [a, b] : s.missing_ranges)
    os << "# missing=" << fmt(a) << ':' << fmt(b) << '\n';
  os << "# kappa,max_abs_eigenvalue\n";
  for (std::size_t i = 0; i < s.kappa_values.size(); ++i)
    os << fmt(s.kappa_values[i]) << ','
       << (s.max_abs_eigenvalue[i] ? fmt(*s.max_abs_eigenvalue[i]) : "nan") << '\n';
}

inline void write_ensemble_csv(std::ostream& os, const std::vector<EnsembleSample>& v) {
  os << "# trajectory,kick,theta,phi\n";
  for (const auto& s : v)
    os << s.trajectory << ',' << s.kick << ',' << fmt(s.point.theta()) << ','
       << fmt(s.point.phi()) << '\n';
}

inline void write_orbits_csv(std::ostream& os, const std::vector<PeriodicOrbit>& orbits) {
  os << "# label,period,index,x,y,z,theta,phi,stable,lambda1_re,lambda1_im,"
        "lambda2_re,lambda2_im,lambda3_re,lambda3_im\n";
  for (const auto& o : orbits) {
    for (std::size_t i = 0; i < o.points.size(); ++i) {
      const auto& p = o.points[i];
      const auto sp = p.spherical();
      os << to_string(o.label) << ',' << o.period << ',' << i << ',' << fmt(p.x()) << ','
         << fmt(p.y()) << ',' << fmt(p.z()) << ',' << fmt(sp.theta()) << ','
         << fmt(sp.phi()) << ',' << (o.is_stable ? 1 : 0);
      for (const auto& l : o.stability_eigenvalues) os << ',' << fmt(l.real()) << ',' << fmt(l.imag());
      os << '\n';
    }
  }
}

inline void write_existence_csv(std::ostream& os, const std::vector<ExistenceEntry>& r) {
  os << "# label,exists,reason\n";
  for (const auto& e : r)
    os << to_string(e.label) << ',' << (e.exists ? 1 : 0) << ",\"" << e.reason << "\"\n";
}

/// label, j, kappa, L, S[, s_1, ..., s_L].
inline void write_survival_csv(std::ostream& os, const std::vector<SurvivalResult>& rows,
                               bool per_kick) {
  os << "# label,j,kappa,L,S";
  if (per_kick) os << ",per_kick...";
  os << '\n';
  for (const auto& r : rows) {
    os << r.label << ',' << fmt_j(r.j) << ',' << fmt(r.kappa) << ',' << r.L << ',' << fmt(r.S);
    if (per_kick && r.per_kick)
      for (double v : *r.per_kick) os << ',' << fmt(v);
    os << '\n';
  }
}

inline void write_survival_grid_csv(std::ostream& os, const SurvivalGrid& g) {
  os << "#orbit=" << g.label << '\n';
  os << "#L=" << g.L << '\n';
  os << "#period=" << g.period << '\n';
  os << "#bifurcation_kappa="
     << (g.classical_bifurcation_kappa ? fmt(*g.classical_bifurcation_kappa) : "none") << '\n';
  os << "#orthogonality_threshold=" << fmt(g.orthogonality_threshold) << '\n';
  os << "# j,kappa,S\n";
  for (std::size_t ji = 0; ji < g.j_values.size(); ++ji)
    for (std::size_t ki = 0; ki < g.kappa_values.size(); ++ki)
      os << fmt_j(g.j_values[ji]) << ',' << fmt(g.kappa_values[ki]) << ','
         << fmt(g.S(static_cast<Eigen::Index>(ji), static_cast<Eigen::Index>(ki))) << '\n';
}

inline void write_orthogonality_curve_csv(std::ostream& os, const SurvivalGrid& g) {
  os << "# kappa,j_min\n";
  for (std::size_t ki = 0; ki < g.kappa_values.size(); ++ki) {
    const auto& jm = g.orthogonality_curve[ki];
    os << fmt(g.kappa_values[ki]) << ',' << (jm ? fmt_j(*jm) : "nan") << '\n';
  }
}

inline void write_criteria_csv(std::ostream& os, const CriteriaReport& r,
                               std::optional<SpinJ> j_min) {
  os << "# orbit=" << r.label << '\n';
  os << "# j=" << fmt_j(r.j) << '\n';
  os << "# epsilon=" << fmt(r.epsilon) << '\n';
  os << "# satisfied=" << (r.satisfied ? 1 : 0) << '\n';
  os << "# max_within_orbit=" << fmt(r.max_within_orbit) << '\n';
  os << "# max_with_partners=" << fmt(r.max_with_partners) << '\n';
  os << "# j_min=" << (j_min ? fmt_j(*j_min) : "none") << '\n';
  os << "# a,b,owner_a,owner_b,overlap\n";
  const auto n = r.pairwise_overlaps.rows();
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      os << a << ',' << b << ',' << r.owner[static_cast<std::size_t>(a)] << ','
         << r.owner[static_cast<std::size_t>(b)] << ',' << fmt(r.pairwise_overlaps(a, b)) << '\n';
}

inline void write_husimi_csv(std::ostream& os, const HusimiGrid& g) {
  os << "# j=" << fmt_j(g.j) << '\n';
  os << "# theta,phi,Q\n";
  for (std::size_t i = 0; i < g.theta.size(); ++i)
    for (std::size_t l = 0; l < g.phi.size(); ++l)
      os << fmt(g.theta[i]) << ',' << fmt(g.phi[l]) << ','
         << fmt(g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l))) << '\n';
}

// ---------------------------------------------------------------------------
// Binary Husimi grid
//
// 64-byte header, then float64 arrays in the writer's byte order:
//   theta[n_theta], theta_weights[n_theta], phi[n_phi], Q[n_theta * n_phi]
//   (row-major, theta outer).
// Header layout (offsets in bytes):
//   0  char[8]  magic "KTHUSIMI"
//   8  uint32   endianness tag 0x01020304
//   12 uint32   format version (1)
//   16 float64  j
//   24 uint64   n_theta
//   32 uint64   n_phi
//   40 char[24] reserved, zero

inline constexpr std::array<char, 8> kHusimiMagic{'K', 'T', 'H', 'U', 'S', 'I', 'M', 'I'};
inline constexpr std::uint32_t kEndianTag = 0x01020304u;
inline constexpr std::uint32_t kHusimiVersion = 1;
inline constexpr std::size_t kHusimiHeaderSize = 64;

namespace detail {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw InvalidArgument("truncated Husimi binary");
  return v;
}

template <class T>
T byteswap(T v) {
  std::array<unsigned char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof v);
  std::reverse(b.begin(), b.end());
  std::memcpy(&v, b.data(), sizeof v);
  return v;
}

}  // namespace detail

inline void write_husimi_binary(std::ostream& os, const HusimiGrid& g) {
  os.write(kHusimiMagic.data(), kHusimiMagic.size());
  detail::put<std::uint32_t>(os, kEndianTag);
  detail::put<std::uint32_t>(os, kHusimiVersion);
  detail::put<double>(os, g.j.value());
  detail::put<std::uint64_t>(os, g.theta.size());
  detail::put<std::uint64_t>(os, g.phi.size());
  const std::array<char, 24> reserved{};
  os.write(reserved.data(), reserved.size());
  for (double v : g.theta) detail::put(os, v);
  for (double v : g.theta_weights) detail::put(os, v);
  for (double v : g.phi) detail::put(os, v);
  for (std::size_t i = 0; i < g.theta.size(); ++i)
    for (std::size_t l = 0; l < g.phi.size(); ++l)
      detail::put(os, g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)));
}

/// Reads a grid written on a host of either byte order.
inline HusimiGrid read_husimi_binary(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kHusimiMagic) throw InvalidArgument("not a Husimi binary grid");
  auto tag = detail::get<std::uint32_t>(is);
  bool swap = false;
  if (tag != kEndianTag) {
    if (detail::byteswap(tag) != kEndianTag) throw InvalidArgument("bad endianness tag");
    swap = true;
  }
  auto fix = [swap](auto v) { return swap ? detail::byteswap(v) : v; };
  const auto version = fix(detail::get<std::uint32_t>(is));
  if (version != kHusimiVersion) throw InvalidArgument("unsupported Husimi format version");
  const double j = fix(detail::get<double>(is));
  const auto nt = fix(detail::get<std::uint64_t>(is));
  const auto np = fix(detail::get<std::uint64_t>(is));
  is.ignore(24);
  if (nt == 0 || np == 0 || nt > (1u << 20) || np > (1u << 20))
    throw InvalidArgument("implausible Husimi grid dimensions");

  HusimiGrid g;
  g.j = SpinJ::from_double(j);
  g.theta.resize(nt);
  g.theta_weights.resize(nt);
  g.phi.resize(np);
  for (auto& v : g.theta) v = fix(detail::get<double>(is));
  for (auto& v : g.theta_weights) v = fix(detail::get<double>(is));
  for (auto& v : g.phi) v = fix(detail::get<double>(is));
  g.values.resize(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(np));
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t l = 0; l < np; ++l)
      g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) =
          fix(detail::get<double>(is));
  return g;
}

}  // namespace kicktop::io
