#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace kicktop {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

/// Great-circle angle between two directions, accurate near 0 and pi.
inline double great_circle_angle(const Vec3& a, const Vec3& b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

/// cos(chi/2) for the angle chi between two unit vectors, computed as
/// |a + b| / 2 so that antipodal points give exactly zero.
inline double half_angle_cosine(const Vec3& a, const Vec3& b) {
  const Vec3 s{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
  return 0.5 * norm(s);
}

/// Direction on the unit sphere: theta in [0, pi], phi in (-pi, pi].
/// At the poles phi is pinned to 0.
class SphericalPoint {
 public:
  SphericalPoint() = default;

  SphericalPoint(double theta, double phi) : theta_(theta), phi_(phi) {
    canonicalize();
  }

  static SphericalPoint from_cartesian(const Vec3& v) {
    const double rho = std::hypot(v[0], v[1]);
    SphericalPoint p;
    p.theta_ = std::atan2(rho, v[2]);
    p.phi_ = rho == 0.0 ? 0.0 : std::atan2(v[1], v[0]);
    p.canonicalize();
    return p;
  }

  double theta() const { return theta_; }
  double phi() const { return phi_; }

  Vec3 cartesian() const {
    const double s = std::sin(theta_);
    return {s * std::cos(phi_), s * std::sin(phi_), std::cos(theta_)};
  }

 private:
  void canonicalize() {
    constexpr double pi = std::numbers::pi;
    // Fold theta outside [0, pi] back onto the sphere (theta -> -theta or
    // 2pi - theta flips phi by pi).
    theta_ = std::remainder(theta_, 2.0 * pi);
    if (theta_ < 0.0) {
      theta_ = -theta_;
      phi_ += pi;
    }
    phi_ = std::remainder(phi_, 2.0 * pi);
    if (phi_ <= -pi) phi_ += 2.0 * pi;
    if (theta_ == 0.0 || theta_ == pi) phi_ = 0.0;
  }

  double theta_ = 0.0;
  double phi_ = 0.0;
};

}  // namespace kicktop
