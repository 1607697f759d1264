#pragma once

// Spin-j kinematics in the |j, m> basis (index k = j - m, so k = 0 is m = j):
// angular momentum operators, spin coherent states, their overlaps and the
// Husimi Q function on a Gauss-Legendre x uniform-phi grid.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kicktop/errors.hpp"
#include "kicktop/parallel.hpp"
#include "kicktop/sphere.hpp"

namespace kicktop {

using cplx = std::complex<double>;

/// Spin quantum number j, stored as the integer 2j.
class SpinJ {
 public:
  SpinJ() = default;

  static SpinJ from_twice(int twice_j) {
    if (twice_j < 0) throw InvalidArgument("2j must be a nonnegative integer");
    SpinJ s;
    s.twice_ = twice_j;
    return s;
  }

  static SpinJ from_double(double j) {
    const double twice = 2.0 * j;
    const double r = std::round(twice);
    if (!std::isfinite(j) || j < 0.0 || std::abs(twice - r) > 1e-9 || r > 1e8)
      throw InvalidArgument("j must be a nonnegative half-integer, got " +
                            std::to_string(j));
    return from_twice(static_cast<int>(r));
  }

  int twice() const { return twice_; }
  double value() const { return 0.5 * twice_; }
  Eigen::Index dim() const { return twice_ + 1; }
  bool is_integer() const { return twice_ % 2 == 0; }
  /// m quantum number of basis index k.
  double m(Eigen::Index k) const { return value() - static_cast<double>(k); }

  friend bool operator==(SpinJ, SpinJ) = default;
  friend auto operator<=>(SpinJ, SpinJ) = default;

 private:
  int twice_ = 0;
};

/// Unit-norm pure state of a spin j.
class SpinState {
 public:
  SpinState(SpinJ j, Eigen::VectorXcd amplitudes)
      : j_(j), amp_(std::move(amplitudes)) {
    if (amp_.size() != j_.dim())
      throw InvalidArgument("amplitude vector length must be 2j + 1");
    if (!(std::abs(amp_.norm() - 1.0) <= 1e-12))
      throw InvalidArgument("SpinState must have unit norm");
  }

  static SpinState normalized(SpinJ j, Eigen::VectorXcd amplitudes) {
    const double n = amplitudes.norm();
    if (!(n > 0.0)) throw InvalidArgument("cannot normalize a zero vector");
    amplitudes /= n;
    return SpinState(j, std::move(amplitudes));
  }

  /// For states produced by norm-preserving evolution, where accumulated
  /// roundoff may exceed the construction tolerance.
  static SpinState evolved(SpinJ j, Eigen::VectorXcd amplitudes) {
    SpinState s;
    s.j_ = j;
    s.amp_ = std::move(amplitudes);
    return s;
  }

  SpinJ j() const { return j_; }
  const Eigen::VectorXcd& amplitudes() const { return amp_; }

 private:
  SpinState() = default;
  SpinJ j_;
  Eigen::VectorXcd amp_;
};

struct AngularMomentum {
  Eigen::MatrixXcd jx, jy, jz;
};

/// <k-1| J+ |k> = sqrt(j(j+1) - m(m+1)) with m = j - k, for k = 1..2j.
inline double raising_element(SpinJ j, Eigen::Index k) {
  const double jj = j.value();
  const double m = j.m(k);
  return std::sqrt(std::max(0.0, jj * (jj + 1.0) - m * (m + 1.0)));
}

/// Dense Jx, Jy, Jz (hbar = 1). Intended for moderate j.
inline AngularMomentum angular_momentum_operators(SpinJ j) {
  const Eigen::Index n = j.dim();
  Eigen::MatrixXd jp = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) jp(k - 1, k) = raising_element(j, k);
  const Eigen::MatrixXd jm = jp.transpose();
  AngularMomentum ops;
  ops.jx = (0.5 * (jp + jm)).cast<cplx>();
  ops.jy = ((jp - jm).cast<cplx>()) * cplx(0.0, -0.5);
  ops.jz = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) ops.jz(k, k) = j.m(k);
  return ops;
}

inline AngularMomentum angular_momentum_operators(double j) {
  return angular_momentum_operators(SpinJ::from_double(j));
}

struct SpinMoments {
  Vec3 mean{};           // <J>
  double casimir = 0.0;  // <J^2>
  /// (<J^2> - |<J>|^2) / j^2
  double uncertainty(SpinJ j) const {
    const double jj = j.value();
    return (casimir - dot(mean, mean)) / (jj * jj);
  }
};

/// <Jx>, <Jy>, <Jz> and <J^2> from the tridiagonal structure (any j).
inline SpinMoments spin_moments(const SpinState& s) {
  const SpinJ j = s.j();
  const auto& a = s.amplitudes();
  cplx jplus = 0.0;
  double jz = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    jz += j.m(k) * std::norm(a[k]);
    if (k > 0) jplus += std::conj(a[k - 1]) * a[k] * raising_element(j, k);
  }
  SpinMoments out;
  out.mean = {jplus.real(), jplus.imag(), jz};
  const double jj = j.value();
  out.casimir = jj * (jj + 1.0) * a.squaredNorm();
  return out;
}

namespace detail {

/// Real SCS envelope sqrt(C(2j, k)) cos^{2j-k}(theta/2) sin^k(theta/2).
inline Eigen::VectorXd coherent_envelope(SpinJ j, double theta) {
  const Eigen::Index n = j.dim();
  const int tj = j.twice();
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  Eigen::VectorXd out(n);
  const double lc = std::log(std::abs(c));
  const double ls = std::log(std::abs(s));
  const double lg = std::lgamma(tj + 1.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int a = tj - static_cast<int>(k);
    const int b = static_cast<int>(k);
    if ((a > 0 && c == 0.0) || (b > 0 && s == 0.0)) {
      out[k] = 0.0;
      continue;
    }
    const double lbin = lg - std::lgamma(a + 1.0) - std::lgamma(b + 1.0);
    double lv = 0.5 * lbin;
    if (a > 0) lv += a * lc;
    if (b > 0) lv += b * ls;
    double v = std::exp(lv);
    if ((a % 2 == 1 && c < 0.0) != (b % 2 == 1 && s < 0.0)) v = -v;
    out[k] = v;
  }
  return out;
}

}  // namespace detail

/// Closed-form coherent state:
/// <j, m | theta, phi> = sqrt(C(2j, j-m)) cos^{j+m}(theta/2) sin^{j-m}(theta/2) e^{i(j-m)phi}.
inline SpinState coherent_state_closed_form(SpinJ j, const SphericalPoint& p) {
  const Eigen::VectorXd env = detail::coherent_envelope(j, p.theta());
  Eigen::VectorXcd amp(j.dim());
  for (Eigen::Index k = 0; k < amp.size(); ++k)
    amp[k] = env[k] * std::polar(1.0, static_cast<double>(k) * p.phi());
  return SpinState::normalized(j, std::move(amp));
}

/// Unitary exp(i theta (Jx sin phi - Jy cos phi)) by eigendecomposition of
/// its Hermitian generator.
inline Eigen::MatrixXcd coherent_rotation(SpinJ j, const SphericalPoint& p) {
  const auto ops = angular_momentum_operators(j);
  const Eigen::MatrixXcd gen = std::sin(p.phi()) * ops.jx - std::cos(p.phi()) * ops.jy;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gen);
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases[i] = std::polar(1.0, p.theta() * es.eigenvalues()[i]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Coherent state as R(theta, phi)|j, j>.
inline SpinState coherent_state_by_rotation(SpinJ j, const SphericalPoint& p) {
  const Eigen::MatrixXcd r = coherent_rotation(j, p);
  return SpinState::normalized(j, r.col(0));
}

/// Largest j for which spin_coherent_state takes the rotation route.
inline constexpr int kRotationRouteMaxTwiceJ = 20;

inline SpinState spin_coherent_state(SpinJ j, const SphericalPoint& p) {
  if (j.twice() <= kRotationRouteMaxTwiceJ) return coherent_state_by_rotation(j, p);
  return coherent_state_closed_form(j, p);
}

inline SpinState spin_coherent_state(double j, const SphericalPoint& p) {
  return spin_coherent_state(SpinJ::from_double(j), p);
}

/// |<a|b>| for coherent states at two directions: [cos(chi/2)]^{2j}.
inline double overlap_analytic(const SphericalPoint& a, const SphericalPoint& b,
                               SpinJ j) {
  if (j.twice() == 0) return 1.0;
  return std::pow(half_angle_cosine(a.cartesian(), b.cartesian()), j.twice());
}

inline double overlap_analytic(const Vec3& a, const Vec3& b, SpinJ j) {
  if (j.twice() == 0) return 1.0;
  return std::pow(half_angle_cosine(a, b), j.twice());
}

/// <a|b>.
inline cplx overlap_numeric(const SpinState& a, const SpinState& b) {
  if (a.j() != b.j()) throw InvalidArgument("overlap of states with different j");
  return a.amplitudes().dot(b.amplitudes());
}

// ---------------------------------------------------------------------------
// Husimi distribution

struct GaussLegendre {
  std::vector<double> nodes;    // descending in (-1, 1)
  std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n.
inline GaussLegendre gauss_legendre(std::size_t n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre rule needs n >= 1");
  GaussLegendre g;
  g.nodes.resize(n);
  g.weights.resize(n);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double dk = static_cast<double>(k);
        const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = dn * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double dk = static_cast<double>(k);
      const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = dn * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.nodes[i] = x;
    g.nodes[n - 1 - i] = -x;
    g.weights[i] = w;
    g.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) g.nodes[n / 2] = 0.0;
  return g;
}

struct HusimiResolution {
  std::size_t n_theta = 0;
  std::size_t n_phi = 0;

  /// max(64, 2j+2) x 2 max(64, 2j+2).
  static HusimiResolution defaults(SpinJ j) {
    const std::size_t nt = std::max<std::size_t>(64, static_cast<std::size_t>(j.twice()) + 2);
    return {nt, 2 * nt};
  }
};

struct HusimiGrid {
  SpinJ j;
  std::vector<double> theta;          // ascending
  std::vector<double> theta_weights;  // Gauss-Legendre weights in cos(theta)
  std::vector<double> phi;            // uniform on [-pi, pi)
  Eigen::MatrixXd values;             // n_theta x n_phi

  double phi_weight() const { return 2.0 * std::numbers::pi / static_cast<double>(phi.size()); }

  /// Quadrature estimate of the integral of Q over the sphere.
  double integral() const {
    double total = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i)
      total += theta_weights[i] * values.row(static_cast<Eigen::Index>(i)).sum();
    return total * phi_weight();
  }

  /// Grid node with the largest Q.
  SphericalPoint argmax() const {
    Eigen::Index r = 0, c = 0;
    values.maxCoeff(&r, &c);
    return SphericalPoint(theta[static_cast<std::size_t>(r)], phi[static_cast<std::size_t>(c)]);
  }
};

namespace detail {

inline HusimiGrid empty_husimi(SpinJ j, HusimiResolution res) {
  if (res.n_theta < 1 || res.n_phi < 1) throw InvalidArgument("empty Husimi grid");
  const GaussLegendre gl = gauss_legendre(res.n_theta);
  HusimiGrid g;
  g.j = j;
  g.theta.resize(res.n_theta);
  g.theta_weights = gl.weights;
  for (std::size_t i = 0; i < res.n_theta; ++i) g.theta[i] = std::acos(gl.nodes[i]);
  g.phi.resize(res.n_phi);
  for (std::size_t l = 0; l < res.n_phi; ++l)
    g.phi[l] = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(l) /
                                       static_cast<double>(res.n_phi);
  g.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(res.n_theta),
                                   static_cast<Eigen::Index>(res.n_phi));
  return g;
}

}  // namespace detail

/// Q(theta, phi) = (2j+1)/(4 pi) |<theta, phi|psi>|^2 on the quadrature grid.
inline HusimiGrid husimi(const SpinState& psi, HusimiResolution res) {
  if (!(std::abs(psi.amplitudes().norm() - 1.0) <= 1e-9))
    throw InvalidArgument("Husimi input state is not normalized");
  const SpinJ j = psi.j();
  HusimiGrid g = detail::empty_husimi(j, res);
  const double pref = static_cast<double>(j.dim()) / (4.0 * std::numbers::pi);
  const auto& a = psi.amplitudes();
  parallel_for(res.n_theta, [&](std::size_t i) {
    const Eigen::VectorXd env = detail::coherent_envelope(j, g.theta[i]);
    const Eigen::VectorXcd b = env.cast<cplx>().cwiseProduct(a);
    for (std::size_t l = 0; l < res.n_phi; ++l) {
      // <theta, phi|psi> = sum_k env_k e^{-i k phi} psi_k, Horner in e^{-i phi}.
      const cplx w = std::polar(1.0, -g.phi[l]);
      cplx acc = 0.0;
      for (Eigen::Index k = b.size() - 1; k >= 0; --k) acc = acc * w + b[k];
      g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = pref * std::norm(acc);
    }
  });
  return g;
}

inline HusimiGrid husimi(const SpinState& psi) {
  return husimi(psi, HusimiResolution::defaults(psi.j()));
}

/// Q = (2j+1)/(4 pi) <theta, phi|rho|theta, phi> for a unit-trace density
/// operator.
inline HusimiGrid husimi(const Eigen::MatrixXcd& rho, SpinJ j, HusimiResolution res) {
  if (rho.rows() != j.dim() || rho.cols() != j.dim())
    throw InvalidArgument("density operator dimension must be 2j + 1");
  if (!(std::abs(rho.trace() - cplx(1.0)) <= 1e-9))
    throw InvalidArgument("density operator must have unit trace");
  HusimiGrid g = detail::empty_husimi(j, res);
  const double pref = static_cast<double>(j.dim()) / (4.0 * std::numbers::pi);
  parallel_for(res.n_theta, [&](std::size_t i) {
    const Eigen::VectorXd env = detail::coherent_envelope(j, g.theta[i]);
    Eigen::VectorXcd v(env.size());
    for (std::size_t l = 0; l < res.n_phi; ++l) {
      for (Eigen::Index k = 0; k < v.size(); ++k)
        v[k] = env[k] * std::polar(1.0, static_cast<double>(k) * g.phi[l]);
      const cplx q = v.dot(rho * v);
      g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = pref * q.real();
    }
  });
  return g;
}

}  // namespace kicktop
