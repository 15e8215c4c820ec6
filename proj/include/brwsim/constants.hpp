#pragma once

#include <cmath>

namespace brw {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Angular frequency (rad/s) of a vacuum wavelength given in nm.
inline double omega_from_lambda_nm(double lambda_nm) {
  return kTwoPi * kSpeedOfLight / (lambda_nm * 1e-9);
}

/// Vacuum wavelength (nm) of an angular frequency given in rad/s.
inline double lambda_nm_from_omega(double omega) {
  return kTwoPi * kSpeedOfLight / omega * 1e9;
}

/// sin(x)/x with the sinc(0) = 1 convention.
inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

} // namespace brw
