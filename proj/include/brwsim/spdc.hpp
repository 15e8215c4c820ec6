#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "brwsim/modesolver.hpp"

namespace brw {

/// Gaussian pump spectrum E_p(W) = exp(-W^2 / delta_omega^2), W being the
/// detuning from the central frequency.
struct PumpSpec {
  double lambda0_nm = 775.0;
  double delta_omega = 0.0; ///< rad/s, 1/e half-width of the amplitude

  /// From the FWHM of the spectral intensity |E_p|^2, in nm.
  static PumpSpec from_fwhm_nm(double lambda0_nm, double fwhm_nm);
  double fwhm_nm() const;
};

/// Which stack mode carries each interacting wave.
struct ModeSelector {
  Polarization pol = Polarization::TE;
  ModeClass cls = ModeClass::TIR;
};

/// Process definition: mode roles, central frequencies, interaction length.
struct ProcessSpec {
  ModeSelector pump{Polarization::TE, ModeClass::TIR};
  ModeSelector signal{Polarization::TE, ModeClass::Bragg};
  ModeSelector idler{Polarization::TM, ModeClass::TIR};
  double omega_s0 = 0.0; ///< rad/s
  double omega_i0 = 0.0; ///< rad/s
  double length_mm = 4.0;
  std::optional<double> qpm_period_um; ///< overrides the solved period

  double omega_p0() const { return omega_s0 + omega_i0; }
  double lambda_p0_nm() const;
  double lambda_s0_nm() const;
  double lambda_i0_nm() const;

  /// Degenerate type-II process with both photons at lambda_pair_nm.
  static ProcessSpec degenerate(double lambda_pair_nm, double length_mm);
};

/// Complex biphoton amplitude sampled on a uniform detuning grid.
/// Normalized so that sum |amp|^2 w_s w_i = 1 with trapezoid weights.
struct JointSpectralAmplitude {
  Eigen::VectorXd omega_s; ///< signal detunings, rad/s
  Eigen::VectorXd omega_i; ///< idler detunings, rad/s
  Eigen::MatrixXcd amplitude; ///< rows = signal, cols = idler
  double omega_s0 = 0.0;
  double omega_i0 = 0.0;
  std::vector<std::string> warnings;

  Eigen::VectorXd weights_s() const; ///< trapezoid quadrature weights
  Eigen::VectorXd weights_i() const;
  double norm() const;
  void normalize();
};

struct GridSpec {
  int n = 512;
  std::optional<double> span; ///< half-width in rad/s; automatic if unset
};

/// Longitudinal dispersion of the three interacting waves, beta(omega) in
/// rad/m. The full JSA builder is written against this interface so that
/// synthetic dispersion can be fed in directly.
struct DispersionBundle {
  std::function<double(double)> beta_p, beta_s, beta_i;
};

/// The three central modes (solved once) plus their group indices.
struct ProcessModes {
  GuidedMode pump, signal, idler;
  double n_g_pump = 0.0, n_g_signal = 0.0, n_g_idler = 0.0;
};

/// Solves and selects the pump/signal/idler modes named by the process.
/// Throws NumericalError when a required mode does not exist.
ProcessModes solve_process_modes(const LayerStack& stack, const ProcessSpec& process,
                                 bool with_group_index = true);

/// Phase mismatch Delta_k - 2*pi/Lambda in rad/um at the given detunings,
/// evaluated from the full beta(omega) of the tracked modes.
double phase_mismatch(const LayerStack& stack, const ProcessSpec& process,
                      double Omega_s, double Omega_i);

/// QPM period Lambda = 2*pi / Delta_k0 in um from the central-frequency
/// mismatch. Throws AlreadyPhaseMatched when |Delta_k0| < 1e-12 rad/um.
/// A negative mismatch flips the poling sign; the returned period is
/// always positive and the flip is reported through *sign_flipped.
double qpm_period(const LayerStack& stack, const ProcessSpec& process,
                  bool* sign_flipped = nullptr);

/// Full-dispersion JSA of Eq.-(2) form: pump envelope times
/// sinc((Delta_k - 2 pi / Lambda) L / 2) with the detuning part of the
/// phase factor exp(i s_k L / 2); the constant global phase is dropped.
JointSpectralAmplitude compute_jsa_full(const LayerStack& stack,
                                        const ProcessSpec& process,
                                        const PumpSpec& pump,
                                        const GridSpec& grid = {});

/// Same construction from explicit dispersion callables (rad/m) and an
/// explicit QPM period.
JointSpectralAmplitude compute_jsa_from_dispersion(const DispersionBundle& dispersion,
                                                   double qpm_period_um,
                                                   double length_mm,
                                                   const PumpSpec& pump,
                                                   double omega_s0, double omega_i0,
                                                   const GridSpec& grid);

/// First-order (group-velocity) JSA: Gaussian in Omega_s + Omega_i, sinc
/// in [(N_p-N_s) Omega_s + (N_p-N_i) Omega_i] L/2, with the matching
/// linear phase factor. Group indices are dimensionless (n_g = c N).
JointSpectralAmplitude compute_jsa_linear(double n_g_pump, double n_g_signal,
                                          double n_g_idler, double length_mm,
                                          const PumpSpec& pump,
                                          double omega_s0, double omega_i0,
                                          const GridSpec& grid = {});

struct OverlapResult {
  double gamma_per_sqrt_um = 0.0; ///< raw integral of u_p u_s* u_i*
  double gamma_hat = 0.0;         ///< dimensionless, see below
  double percent = 0.0;           ///< 100 * gamma_hat
};

/// Trapezoidal overlap integral of three L2-normalized profiles sharing
/// one grid. The dimensionless figure multiplies the raw integral by the
/// pump mode's effective width sqrt(1 / integral u_p^4): the value is 1
/// for three identical top-hat profiles and matches the convention used
/// for the published percentages.
OverlapResult mode_overlap(const Eigen::ArrayXd& u_p, const Eigen::ArrayXd& u_s,
                           const Eigen::ArrayXd& u_i, double dx_um);

/// Pump bandwidth (rad/s) that symmetrizes the JSA for group indices with
/// N_p strictly between N_s and N_i:
///   delta_omega = 2 / (alpha L sqrt(N_s-N_p) sqrt(N_p-N_i)), alpha = 0.439.
/// Group indices are dimensionless. Throws NumericalError when the
/// ordering precondition fails.
double optimal_pump_bandwidth(double n_g_pump, double n_g_signal,
                              double n_g_idler, double length_mm);

} // namespace brw
