#pragma once

// One-period kicked-top unitary U = exp(-i kappa/(2 j tau) Jz^2) exp(-i p Jy)
// and the quantities built from repeated kicks: trajectories, survival
// probabilities and Husimi snapshots.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kicktop/classical.hpp"
#include "kicktop/errors.hpp"
#include "kicktop/spin.hpp"

namespace kicktop {

/// exp(-i p Jy) in the |j, m> basis. The matrix is real (a Wigner small-d
/// matrix). Jy = S T S^dagger with S = diag(i^k) and T real symmetric
/// tridiagonal, so the rotation is S V e^{-ipL} V^T S^dagger where T = V L V^T.
inline Eigen::MatrixXd rotation_factor(SpinJ j, double p) {
  const Eigen::Index n = j.dim();
  if (n == 1) return Eigen::MatrixXd::Ones(1, 1);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (Eigen::Index k = 1; k < n; ++k) sub[k - 1] = 0.5 * raising_element(j, k);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw NumericalError("tridiagonal eigensolver failed for j = " + std::to_string(j.value()));

  const Eigen::MatrixXd& v = es.eigenvectors();
  const Eigen::ArrayXd angle = p * es.eigenvalues().array();
  Eigen::MatrixXd even(n, n), odd(n, n);
  even.noalias() = v * angle.cos().matrix().asDiagonal() * v.transpose();
  odd.noalias() = v * angle.sin().matrix().asDiagonal() * v.transpose();

  // Entry (k, l) is Re(i^{k-l} (C - i S)_{kl}).
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = 0; k < n; ++k) {
      switch (((k - l) % 4 + 4) % 4) {
        case 0: w(k, l) = even(k, l); break;
        case 1: w(k, l) = odd(k, l); break;
        case 2: w(k, l) = -even(k, l); break;
        default: w(k, l) = -odd(k, l); break;
      }
    }
  }
  return w;
}

/// Shared, immutable rotation factors keyed by (2j, p).
class RotationCache {
 public:
  std::shared_ptr<const Eigen::MatrixXd> get(SpinJ j, double p) {
    const Key key{j.twice(), p};
    {
      std::lock_guard lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    auto w = std::make_shared<const Eigen::MatrixXd>(rotation_factor(j, p));
    std::lock_guard lock(mutex_);
    return entries_.try_emplace(key, std::move(w)).first->second;
  }

  void clear() {
    std::lock_guard lock(mutex_);
    entries_.clear();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  using Key = std::pair<int, double>;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const Eigen::MatrixXd>> entries_;
};

/// Floquet operator U = D W, with D the diagonal twist and W the rotation.
class FloquetOperator {
 public:
  FloquetOperator(SpinJ j, KickedTopParams params,
                  std::shared_ptr<const Eigen::MatrixXd> rotation)
      : j_(j), params_(params), rotation_(std::move(rotation)) {
    if (!rotation_ || rotation_->rows() != j.dim() || rotation_->cols() != j.dim())
      throw InvalidArgument("rotation factor has the wrong dimension");
    const double scale = params_.kappa / (2.0 * j_.value() * params_.tau);
    phases_.resize(j.dim());
    for (Eigen::Index k = 0; k < phases_.size(); ++k) {
      const double m = j_.m(k);
      phases_[k] = std::polar(1.0, -scale * m * m);
    }
  }

  SpinJ j() const { return j_; }
  const KickedTopParams& params() const { return params_; }
  Eigen::Index dim() const { return j_.dim(); }
  const Eigen::MatrixXd& rotation() const { return *rotation_; }
  const Eigen::VectorXcd& twist_phases() const { return phases_; }

  /// psi -> U psi.
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    out.noalias() = (*rotation_) * in;
    out.array() *= phases_.array();
  }

  Eigen::VectorXcd operator*(const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd out(v.size());
    apply(v, out);
    return out;
  }

  Eigen::MatrixXcd matrix() const {
    return phases_.asDiagonal() * rotation_->cast<cplx>();
  }

 private:
  SpinJ j_;
  KickedTopParams params_;
  std::shared_ptr<const Eigen::MatrixXd> rotation_;
  Eigen::VectorXcd phases_;
};

inline FloquetOperator build_floquet(SpinJ j, const KickedTopParams& params,
                                     RotationCache* cache = nullptr) {
  params.validate();
  if (j.twice() == 0) throw InvalidArgument("the kicked-top twist needs j >= 1/2");
  auto w = cache ? cache->get(j, params.p)
                 : std::make_shared<const Eigen::MatrixXd>(rotation_factor(j, params.p));
  return FloquetOperator(j, params, std::move(w));
}

inline FloquetOperator build_floquet(double j, const KickedTopParams& params,
                                     RotationCache* cache = nullptr) {
  return build_floquet(SpinJ::from_double(j), params, cache);
}

/// Dense U^n, for checking repeated application at small j.
inline Eigen::MatrixXcd floquet_power(const FloquetOperator& u, int n) {
  if (n < 0) throw InvalidArgument("negative power");
  const Eigen::MatrixXcd m = u.matrix();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(u.dim(), u.dim());
  for (int i = 0; i < n; ++i) out = m * out;
  return out;
}

namespace detail {

inline void require_same_dim(const SpinState& s, const FloquetOperator& u) {
  if (s.j() != u.j())
    throw InvalidArgument("state and Floquet operator have different j");
}

}  // namespace detail

/// Calls visit(kick, amplitudes) for kick = 1..n_kicks after each application.
template <class Visit>
void for_each_kick(const SpinState& psi0, const FloquetOperator& u,
                   std::size_t n_kicks, Visit&& visit) {
  detail::require_same_dim(psi0, u);
  Eigen::VectorXcd cur = psi0.amplitudes();
  Eigen::VectorXcd next(cur.size());
  for (std::size_t k = 1; k <= n_kicks; ++k) {
    u.apply(cur, next);
    cur.swap(next);
    visit(k, static_cast<const Eigen::VectorXcd&>(cur));
  }
}

/// States after 0, 1, ..., n_kicks kicks.
inline std::vector<SpinState> evolve(const SpinState& psi0,
                                     const FloquetOperator& u,
                                     std::size_t n_kicks) {
  detail::require_same_dim(psi0, u);
  std::vector<SpinState> out;
  out.reserve(n_kicks + 1);
  out.push_back(psi0);
  for_each_kick(psi0, u, n_kicks, [&](std::size_t, const Eigen::VectorXcd& a) {
    out.push_back(SpinState::evolved(psi0.j(), a));
  });
  return out;
}

struct SurvivalResult {
  std::string label;
  SpinJ j;
  double kappa = 0.0;
  int period = 1;
  int L = 0;
  double S = 0.0;
  /// |<psi(0)|psi(n l)>|^2 for l = 1..L, when requested.
  std::optional<std::vector<double>> per_kick;
};

/// S(L) = (1/L) sum_{l=1..L} |<psi0|U^{n l}|psi0>|^2.
inline SurvivalResult survival_probability(const SpinState& psi0,
                                           const FloquetOperator& u, int period,
                                           int L, bool keep_per_kick = false) {
  if (L < 1) throw InvalidArgument("L must be >= 1");
  if (period < 1) throw InvalidArgument("period must be >= 1");
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(L));
  const auto& a0 = psi0.amplitudes();
  for_each_kick(psi0, u, static_cast<std::size_t>(period) * static_cast<std::size_t>(L),
                [&](std::size_t k, const Eigen::VectorXcd& a) {
                  if (k % static_cast<std::size_t>(period) == 0)
                    terms.push_back(std::norm(a0.dot(a)));
                });
  SurvivalResult r;
  r.j = psi0.j();
  r.kappa = u.params().kappa;
  r.period = period;
  r.L = L;
  double sum = 0.0;
  for (double t : terms) sum += t;
  r.S = sum / static_cast<double>(L);
  if (keep_per_kick) r.per_kick = std::move(terms);
  return r;
}

/// Survival of the coherent state centred on a classical fixed point.
inline SurvivalResult survival_fixed_point(const ClassicalState& point, SpinJ j,
                                           const KickedTopParams& params, int L,
                                           bool keep_per_kick = false,
                                           RotationCache* cache = nullptr) {
  const FloquetOperator u = build_floquet(j, params, cache);
  const SpinState psi0 = spin_coherent_state(j, point.spherical());
  SurvivalResult r = survival_probability(psi0, u, 1, L, keep_per_kick);
  r.label = "POINT";
  return r;
}

/// Survival under U^n of the coherent state on points[0] of a period-n orbit.
inline SurvivalResult survival_period_n(const PeriodicOrbit& orbit, SpinJ j,
                                        const KickedTopParams& params, int L,
                                        bool keep_per_kick = false,
                                        RotationCache* cache = nullptr) {
  if (orbit.period < 1 || orbit.points.empty())
    throw InvalidArgument("orbit must have period >= 1");
  const FloquetOperator u = build_floquet(j, params, cache);
  const SpinState psi0 = spin_coherent_state(j, orbit.points.front().spherical());
  SurvivalResult r = survival_probability(psi0, u, orbit.period, L, keep_per_kick);
  r.label = std::string(to_string(orbit.label));
  return r;
}

/// |<target|psi(k)>|^2 for k = 0..n_kicks.
inline std::vector<double> projection_series(const SpinState& psi0,
                                             const FloquetOperator& u,
                                             const SpinState& target,
                                             std::size_t n_kicks) {
  detail::require_same_dim(target, u);
  std::vector<double> out;
  out.reserve(n_kicks + 1);
  out.push_back(std::norm(overlap_numeric(target, psi0)));
  for_each_kick(psi0, u, n_kicks, [&](std::size_t, const Eigen::VectorXcd& a) {
    out.push_back(std::norm(target.amplitudes().dot(a)));
  });
  return out;
}

/// Husimi snapshots of the evolved coherent state at the requested kicks
/// (sorted, nonnegative).
inline std::vector<HusimiGrid> husimi_timeseries(const SphericalPoint& start, SpinJ j,
                                                 const KickedTopParams& params,
                                                 const std::vector<std::size_t>& kicks,
                                                 std::optional<HusimiResolution> res = {},
                                                 RotationCache* cache = nullptr) {
  if (!std::is_sorted(kicks.begin(), kicks.end()))
    throw InvalidArgument("kick list must be sorted");
  const HusimiResolution r = res.value_or(HusimiResolution::defaults(j));
  const FloquetOperator u = build_floquet(j, params, cache);
  const SpinState psi0 = spin_coherent_state(j, start);
  std::vector<HusimiGrid> out;
  out.reserve(kicks.size());
  std::size_t next = 0;
  while (next < kicks.size() && kicks[next] == 0) {
    out.push_back(husimi(psi0, r));
    ++next;
  }
  if (next == kicks.size()) return out;
  for_each_kick(psi0, u, kicks.back(), [&](std::size_t k, const Eigen::VectorXcd& a) {
    while (next < kicks.size() && kicks[next] == k) {
      out.push_back(husimi(SpinState::evolved(j, a), r));
      ++next;
    }
  });
  return out;
}

/// Mean of the Husimi distributions after kicks 1..n_kicks.
inline HusimiGrid husimi_time_average(const SpinState& psi0, const FloquetOperator& u,
                                      std::size_t n_kicks,
                                      std::optional<HusimiResolution> res = {}) {
  if (n_kicks < 1) throw InvalidArgument("n_kicks must be >= 1");
  const HusimiResolution r = res.value_or(HusimiResolution::defaults(psi0.j()));
  std::optional<HusimiGrid> acc;
  for_each_kick(psi0, u, n_kicks, [&](std::size_t, const Eigen::VectorXcd& a) {
    HusimiGrid g = husimi(SpinState::evolved(psi0.j(), a), r);
    if (!acc)
      acc = std::move(g);
    else
      acc->values += g.values;
  });
  acc->values /= static_cast<double>(n_kicks);
  return *acc;
}

inline HusimiGrid husimi_time_average(const SphericalPoint& start, SpinJ j,
                                      const KickedTopParams& params, std::size_t n_kicks,
                                      std::optional<HusimiResolution> res = {},
                                      RotationCache* cache = nullptr) {
  const FloquetOperator u = build_floquet(j, params, cache);
  return husimi_time_average(spin_coherent_state(j, start), u, n_kicks, res);
}

}  // namespace kicktop
