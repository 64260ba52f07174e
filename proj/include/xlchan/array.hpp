#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "xlchan/errors.hpp"

// Uniform linear array geometry and steering vectors.
//
// Element n (0-based, n = 0..N-1) sits at signed offset delta_n * d from the
// array center, delta_n = n - (N-1)/2, so the aperture is symmetric about
// the origin. Angles are normalized: theta = 2*(d/lambda)*cos(phi) for
// physical incidence phi, hence theta in [-1, 1] at half-wavelength spacing.
//
// Phase convention (single convention used everywhere):
//   far:   a_n(theta)    = N^-1/2 * exp(+j * (2*pi*d/lambda) * delta_n * theta)
//   near:  b_n(theta, r) = N^-1/2 * exp(-j * (2*pi/lambda) * (r_n - r))
// with the exact per-element distance
//   r_n = sqrt(r^2 + delta_n^2 d^2 - 2 r delta_n d theta).
// Expanding r_n to first order gives r_n - r -> -delta_n*d*theta as
// r -> inf, so b(theta, r) converges to a(theta) elementwise; the far-field
// model is the exact limit of the near-field one, not a separate convention.

namespace xlchan {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

struct ArrayConfig {
  int num_antennas;        // N, >= 2
  double wavelength;       // lambda [m], > 0
  double antenna_spacing;  // d [m], > 0

  ArrayConfig(int n, double lambda, double spacing)
      : num_antennas(n), wavelength(lambda), antenna_spacing(spacing) {
    if (n < 2) throw DomainError("ArrayConfig: num_antennas must be >= 2");
    if (!(lambda > 0.0)) throw DomainError("ArrayConfig: wavelength must be > 0");
    if (!(spacing > 0.0)) throw DomainError("ArrayConfig: antenna_spacing must be > 0");
  }

  static ArrayConfig half_wavelength(int n, double lambda) {
    return ArrayConfig(n, lambda, lambda / 2.0);
  }

  // Physical aperture D = (N-1)*d: distance between the outermost elements.
  double aperture() const {
    return (num_antennas - 1) * antenna_spacing;
  }

  // Rayleigh distance Z = 2*D^2/lambda, the conventional far/near boundary.
  double rayleigh_distance() const {
    const double d_ap = aperture();
    return 2.0 * d_ap * d_ap / wavelength;
  }

  // Minimum source radius the near-field model accepts. Below about one
  // aperture the spherical-wave expansion behind the polar grid stops being
  // meaningful, so N*d is enforced as a hard floor.
  double guard_radius() const {
    return num_antennas * antenna_spacing;
  }

  // Signed element offset in units of d: (2n - N - 1)/2 for 1-based n.
  double element_offset(int n) const {
    return n - (num_antennas - 1) / 2.0;
  }
};

namespace detail {

inline void check_angle(double theta, const char* who) {
  if (!(theta >= -1.0 && theta <= 1.0))
    throw DomainError(std::string(who) + ": angle must lie in [-1, 1], got " +
                      std::to_string(theta));
}

} // namespace detail

// Far-field (planar wavefront) steering vector, unit L2 norm.
inline CVector far_steering(const ArrayConfig& cfg, double theta) {
  detail::check_angle(theta, "far_steering");
  const int n_ant = cfg.num_antennas;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_ant));
  const double k =
      2.0 * M_PI * cfg.antenna_spacing / cfg.wavelength;  // = pi at d = lambda/2
  CVector a(n_ant);
  for (int n = 0; n < n_ant; ++n) {
    const double phase = k * cfg.element_offset(n) * theta;
    a[n] = std::polar(scale, phase);
  }
  return a;
}

// Near-field (spherical wavefront) steering vector, unit L2 norm. The
// common bulk phase exp(-j*2*pi*r/lambda) is removed so only per-element
// curvature remains; this is what makes the r -> inf limit equal the
// far-field vector exactly.
inline CVector near_steering(const ArrayConfig& cfg, double theta, double r) {
  detail::check_angle(theta, "near_steering");
  if (!(r > 0.0) || !std::isfinite(r))
    throw DomainError("near_steering: distance must be finite and > 0");
  if (r < cfg.guard_radius())
    throw DomainError("near_steering: distance " + std::to_string(r) +
                      " m is below the guard radius N*d = " +
                      std::to_string(cfg.guard_radius()) + " m");
  const int n_ant = cfg.num_antennas;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_ant));
  const double d = cfg.antenna_spacing;
  const double k = 2.0 * M_PI / cfg.wavelength;
  CVector b(n_ant);
  for (int n = 0; n < n_ant; ++n) {
    const double off = cfg.element_offset(n) * d;
    // r_n - r = (off^2 - 2 r off theta) / (r_n + r); the quotient form keeps
    // full precision when r dwarfs the aperture.
    const double s = off * off - 2.0 * r * off * theta;
    const double rn = std::sqrt(r * r + s);
    b[n] = std::polar(scale, -k * (s / (rn + r)));
  }
  return b;
}

} // namespace xlchan
