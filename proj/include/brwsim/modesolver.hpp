#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <map>
#include <vector>

#include "brwsim/layer_stack.hpp"

namespace brw {

enum class ModeClass { TIR, Bragg };

inline const char* to_string(ModeClass c) {
  return c == ModeClass::TIR ? "TIR" : "Bragg";
}

/// Uniform transverse grid; x = 0 is the core center.
struct ModeGrid {
  double x0_um = 0.0;
  double dx_um = 0.0;
  int n = 0;
  double x(int k) const { return x0_um + k * dx_um; }
};

/// One solved planar mode of a LayerStack at a fixed vacuum wavelength.
struct GuidedMode {
  Polarization pol = Polarization::TE;
  ModeClass mode_class = ModeClass::TIR;
  double n_eff = 0.0;
  double lambda_nm = 0.0;
  double beta_rad_per_um = 0.0; ///< 2*pi*n_eff / lambda
  Eigen::ArrayXd profile;       ///< u(x_k), units 1/sqrt(um), sum u^2 dx = 1
  ModeGrid grid;
  double core_fraction = 0.0; ///< fraction of |u|^2 inside the core
  int parity = 0;             ///< +1 even, -1 odd (symmetric stacks)
};

struct FindModesOptions {
  double scan_step = 2e-4;   ///< n_eff scan resolution for sign changes
  double bisect_tol = 1e-12; ///< n_eff refinement tolerance
  bool with_profiles = true;
  double profile_dx_um = 0.0; ///< 0 selects ~2 nm automatically
};

/// Product transfer matrix of the full expanded stack, mapping the field
/// pair (u, u'/q) from the bottom outer interface to the top one. q = 1
/// for TE, n^2 for TM. Unimodular for lossless layers.
Eigen::Matrix2cd transfer_matrix(const LayerStack& stack, double n_eff,
                                 double lambda_nm, Polarization pol);

/// All bound modes with n_eff in [lo, hi]: scans the dispersion function
/// for sign changes, refines each root by bisection, evaluates and
/// normalizes the field profile, and classifies the guidance mechanism.
/// A mode counts as TIR when its transverse field is evanescent in at
/// least one reflector material (n_eff above the smaller reflector
/// index); otherwise it is Bragg-guided. Returned sorted by descending
/// n_eff. An empty list is a valid result.
std::vector<GuidedMode> find_modes(const LayerStack& stack, double lambda_nm,
                                   Polarization pol, double lo, double hi,
                                   const FindModesOptions& opts = {});

/// Re-evaluates the piecewise-analytic field of `mode` on a uniform grid
/// spanning the stack plus 2 um of outer medium on each side.
void field_profile(const LayerStack& stack, GuidedMode& mode,
                   double dx_um = 0.0);

struct GroupIndexResult {
  double n_g = 0.0;           ///< c / group velocity
  double error_estimate = 0.0;
};

/// Group index n_g = n_eff - lambda * dn_eff/dlambda by Richardson-
/// extrapolated central differences on a generic dispersion curve.
GroupIndexResult group_index_of(const std::function<double(double)>& n_eff_of_lambda_nm,
                                double lambda_nm, double delta_lambda_nm = 0.1);

/// Group index of a solved mode; the mode is re-solved at lambda +- delta
/// and lambda +- delta/2 with identity maintained by n_eff continuity.
/// Throws TrackingError if the mode cannot be followed.
GroupIndexResult group_index(const LayerStack& stack, const GuidedMode& mode,
                             double delta_lambda_nm = 0.1);

/// Relative deviation of each reflector layer from the quarter-wave
/// condition: t_i * kappa_i / (pi/2) - 1, with kappa_i the transverse
/// wavevector magnitude in that layer. Element 0 is layer 1.
std::array<double, 2> quarter_wave_deviation(const LayerStack& stack,
                                             double lambda_nm, double n_eff,
                                             Polarization pol);

/// Follows one mode across wavelength, warm-starting each solve from the
/// nearest solved point. Used for dispersion sampling beta(omega).
class ModeTracker {
public:
  ModeTracker(const LayerStack& stack, Polarization pol, double lambda0_nm,
              double n_eff0);

  /// n_eff at the requested wavelength. Throws TrackingError when the
  /// nearest root jumps by more than 0.05 in n_eff or no root is found.
  double n_eff_at(double lambda_nm);

  /// beta in rad/m at angular frequency omega (rad/s).
  double beta_at_omega(double omega);

private:
  const LayerStack& stack_;
  Polarization pol_;
  std::map<double, double> solved_; // lambda_nm -> n_eff
};

/// The most core-confined mode of the requested class, or nullptr.
const GuidedMode* select_mode(const std::vector<GuidedMode>& modes, ModeClass cls);

} // namespace brw
