#pragma once

#include <Eigen/Dense>
#include <vector>

#include "brwsim/spdc.hpp"

namespace brw {

/// Schmidt decomposition of a JSA: Phi = sum_n sqrt(lambda_n) U_n V_n.
struct SchmidtResult {
  Eigen::VectorXd lambdas;  ///< eigenvalues, descending, sum = 1
  Eigen::MatrixXcd u_modes; ///< sampled U_n(Omega_s), one mode per column
  Eigen::MatrixXcd v_modes; ///< sampled V_n(Omega_i), one mode per column
  double schmidt_number = 1.0; ///< K = 1 / sum lambda_n^2
  double purity = 1.0;         ///< P = 1 / K
  double entropy_bits = 0.0;   ///< E = -sum lambda_n log2 lambda_n
  double reconstruction_residual = 0.0;
};

/// Decomposition via SVD of the quadrature-weighted amplitude matrix, so
/// the eigenvalues are grid independent. The input must be normalized to
/// 1e-6 or an error is thrown. n_modes bounds only the number of sampled
/// mode columns returned; K, purity and entropy use the full spectrum.
SchmidtResult schmidt_decompose(const JointSpectralAmplitude& jsa, int n_modes = 16);

/// K = 1 / sum lambda_n^2 for a normalized eigenvalue sequence; K = 1
/// exactly when a single eigenvalue carries all weight.
double schmidt_number(const Eigen::VectorXd& lambdas);

/// Entropy of entanglement in bits, with 0 log 0 = 0 and eigenvalues
/// below 1e-12 discarded as numerical noise.
double entropy(const Eigen::VectorXd& lambdas);

struct MarginalWidth {
  double fwhm_nm = 0.0;
  bool multi_peaked = false; ///< widest contiguous half-max interval used
};

enum class MarginalAxis { Signal, Idler };

/// FWHM of the marginal spectrum integrated over the other axis, linearly
/// interpolated between grid points and converted to nm at the photon's
/// central wavelength.
MarginalWidth marginal_bandwidth(const JointSpectralAmplitude& jsa, MarginalAxis which);

enum class CorrelationSign { Anticorrelated, Uncorrelated, Correlated };

inline const char* to_string(CorrelationSign s) {
  switch (s) {
    case CorrelationSign::Anticorrelated: return "anticorrelated";
    case CorrelationSign::Uncorrelated: return "uncorrelated";
    default: return "correlated";
  }
}

struct CorrelationResult {
  double rho = 0.0; ///< Pearson correlation of |Phi|^2
  CorrelationSign sign = CorrelationSign::Uncorrelated;
};

/// Pearson correlation of the joint spectral intensity; |rho| < 0.05
/// classifies as uncorrelated.
CorrelationResult correlation_sign(const JointSpectralAmplitude& jsa);

enum class JsaBuilder { Full, Linear };

struct SweepRow {
  double pump_fwhm_nm = 0.0;
  double schmidt_number = 0.0;
  double entropy_bits = 0.0;
  double rho = 0.0;
  double signal_fwhm_nm = 0.0;
  double idler_fwhm_nm = 0.0;
};

/// One JSA build + decomposition per pump bandwidth. Rows are
/// independent; with threads > 1 they are evaluated in parallel without
/// changing any numeric result.
std::vector<SweepRow> sweep_pump_bandwidth(const LayerStack& stack,
                                           const ProcessSpec& process,
                                           const std::vector<double>& pump_fwhms_nm,
                                           JsaBuilder builder,
                                           const GridSpec& grid = {},
                                           int threads = 1);

} // namespace brw
