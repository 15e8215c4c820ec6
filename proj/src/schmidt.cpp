#include "brwsim/schmidt.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <mutex>

#include "brwsim/constants.hpp"
#include "brwsim/errors.hpp"
#include "brwsim/parallel.hpp"

namespace brw {

namespace {

constexpr double kEigenvalueFloor = 1e-12;

void check_distribution(const Eigen::VectorXd& lambdas) {
  double sum = 0.0;
  for (int i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] < -1e-12) throw NumericalError("Schmidt eigenvalues must be non-negative");
    sum += lambdas[i];
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw NumericalError("Schmidt eigenvalue sequence is not normalized: sum = " +
                         std::to_string(sum));
}

} // namespace

double schmidt_number(const Eigen::VectorXd& lambdas) {
  check_distribution(lambdas);
  const double sum_sq = lambdas.squaredNorm();
  if (!(sum_sq > 0.0)) throw NumericalError("all Schmidt eigenvalues are zero");
  return 1.0 / sum_sq;
}

double entropy(const Eigen::VectorXd& lambdas) {
  check_distribution(lambdas);
  double e = 0.0;
  for (int i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas[i];
    if (l > kEigenvalueFloor) e -= l * std::log2(l);
  }
  return e;
}

SchmidtResult schmidt_decompose(const JointSpectralAmplitude& jsa, int n_modes) {
  const double norm = jsa.norm();
  if (std::abs(norm - 1.0) > 1e-6)
    throw NumericalError("JSA is not normalized (norm = " + std::to_string(norm) + ")");
  const int n_s = static_cast<int>(jsa.amplitude.rows());
  const int n_i = static_cast<int>(jsa.amplitude.cols());
  if (n_modes > std::min(n_s, n_i)) n_modes = std::min(n_s, n_i);
  if (n_modes < 1) throw Error("n_modes must be >= 1");

  const Eigen::VectorXd ws = jsa.weights_s();
  const Eigen::VectorXd wi = jsa.weights_i();
  const Eigen::VectorXd sqrt_ws = ws.cwiseSqrt();
  const Eigen::VectorXd sqrt_wi = wi.cwiseSqrt();

  Eigen::MatrixXcd weighted = sqrt_ws.asDiagonal() * jsa.amplitude * sqrt_wi.asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(weighted, Eigen::ComputeThinU | Eigen::ComputeThinV);

  const Eigen::VectorXd sigma = svd.singularValues();
  SchmidtResult result;
  result.lambdas = sigma.array().square();

  const double sum_sq = result.lambdas.squaredNorm();
  result.schmidt_number = 1.0 / sum_sq;
  result.purity = sum_sq;
  result.entropy_bits = 0.0;
  for (int i = 0; i < result.lambdas.size(); ++i) {
    const double l = result.lambdas[i];
    if (l > kEigenvalueFloor) result.entropy_bits -= l * std::log2(l);
  }

  result.reconstruction_residual =
      (weighted - svd.matrixU() * sigma.asDiagonal() * svd.matrixV().adjoint()).norm();

  result.u_modes.resize(n_s, n_modes);
  result.v_modes.resize(n_i, n_modes);
  for (int m = 0; m < n_modes; ++m) {
    result.u_modes.col(m) = svd.matrixU().col(m).cwiseQuotient(sqrt_ws.cast<std::complex<double>>());
    result.v_modes.col(m) = svd.matrixV().col(m).conjugate().cwiseQuotient(sqrt_wi.cast<std::complex<double>>());
  }
  return result;
}

MarginalWidth marginal_bandwidth(const JointSpectralAmplitude& jsa, MarginalAxis which) {
  const Eigen::VectorXd ws = jsa.weights_s();
  const Eigen::VectorXd wi = jsa.weights_i();
  const bool signal = (which == MarginalAxis::Signal);
  const Eigen::VectorXd& axis = signal ? jsa.omega_s : jsa.omega_i;
  const int n = static_cast<int>(axis.size());

  Eigen::VectorXd marginal = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < jsa.amplitude.rows(); ++k)
    for (int l = 0; l < jsa.amplitude.cols(); ++l) {
      const double p = std::norm(jsa.amplitude(k, l));
      if (signal)
        marginal[k] += p * wi[l];
      else
        marginal[l] += p * ws[k];
    }

  const double peak = marginal.maxCoeff();
  if (!(peak > 0.0)) throw NumericalError("marginal spectrum is identically zero");
  const double half = 0.5 * peak;

  // maximal runs of samples above half maximum
  struct Run {
    int first, last;
  };
  std::vector<Run> runs;
  for (int k = 0; k < n; ++k) {
    if (marginal[k] >= half) {
      if (!runs.empty() && runs.back().last == k - 1)
        runs.back().last = k;
      else
        runs.push_back({k, k});
    }
  }
  if (runs.empty()) throw NumericalError("no samples above half maximum");

  MarginalWidth out;
  out.multi_peaked = runs.size() > 1;
  const Run* widest = &runs[0];
  for (const auto& r : runs)
    if (r.last - r.first > widest->last - widest->first) widest = &r;

  const double d = axis[1] - axis[0];
  double left = axis[widest->first];
  if (widest->first > 0) {
    const double p0 = marginal[widest->first - 1];
    const double p1 = marginal[widest->first];
    left = axis[widest->first - 1] + (half - p0) / (p1 - p0) * d;
  }
  double right = axis[widest->last];
  if (widest->last < n - 1) {
    const double p0 = marginal[widest->last];
    const double p1 = marginal[widest->last + 1];
    right = axis[widest->last] + (half - p0) / (p1 - p0) * d;
  }

  const double fwhm_omega = right - left;
  const double omega0 = signal ? jsa.omega_s0 : jsa.omega_i0;
  const double lambda_m = kTwoPi * kSpeedOfLight / omega0;
  out.fwhm_nm = lambda_m * lambda_m * fwhm_omega / (kTwoPi * kSpeedOfLight) * 1e9;
  return out;
}

CorrelationResult correlation_sign(const JointSpectralAmplitude& jsa) {
  const Eigen::VectorXd ws = jsa.weights_s();
  const Eigen::VectorXd wi = jsa.weights_i();

  double z = 0.0, mean_s = 0.0, mean_i = 0.0;
  for (int k = 0; k < jsa.amplitude.rows(); ++k)
    for (int l = 0; l < jsa.amplitude.cols(); ++l) {
      const double p = std::norm(jsa.amplitude(k, l)) * ws[k] * wi[l];
      z += p;
      mean_s += p * jsa.omega_s[k];
      mean_i += p * jsa.omega_i[l];
    }
  if (!(z > 0.0)) throw NumericalError("joint spectral intensity is identically zero");
  mean_s /= z;
  mean_i /= z;

  double var_s = 0.0, var_i = 0.0, cov = 0.0;
  for (int k = 0; k < jsa.amplitude.rows(); ++k)
    for (int l = 0; l < jsa.amplitude.cols(); ++l) {
      const double p = std::norm(jsa.amplitude(k, l)) * ws[k] * wi[l];
      const double ds = jsa.omega_s[k] - mean_s;
      const double di = jsa.omega_i[l] - mean_i;
      var_s += p * ds * ds;
      var_i += p * di * di;
      cov += p * ds * di;
    }

  CorrelationResult r;
  const double denom = std::sqrt(var_s * var_i);
  r.rho = (denom > 0.0) ? cov / denom : 0.0;
  if (r.rho < -0.05)
    r.sign = CorrelationSign::Anticorrelated;
  else if (r.rho > 0.05)
    r.sign = CorrelationSign::Correlated;
  else
    r.sign = CorrelationSign::Uncorrelated;
  return r;
}

std::vector<SweepRow> sweep_pump_bandwidth(const LayerStack& stack,
                                           const ProcessSpec& process,
                                           const std::vector<double>& pump_fwhms_nm,
                                           JsaBuilder builder,
                                           const GridSpec& grid,
                                           int threads) {
  if (pump_fwhms_nm.empty()) throw Error("sweep needs at least one pump bandwidth");
  const double lambda_p0 = process.lambda_p0_nm();

  // the linear builder only needs the group indices, solved once
  ProcessModes linear_modes;
  std::optional<double> solved_period;
  if (builder == JsaBuilder::Linear) {
    linear_modes = solve_process_modes(stack, process, /*with_group_index=*/true);
  } else if (!process.qpm_period_um && !stack.qpm_period_um) {
    solved_period = qpm_period(stack, process);
  }

  std::vector<SweepRow> rows(pump_fwhms_nm.size());
  parallel_for(static_cast<int>(pump_fwhms_nm.size()), threads, [&](int r) {
    const double fwhm = pump_fwhms_nm[r];
    const PumpSpec pump = PumpSpec::from_fwhm_nm(lambda_p0, fwhm);
    JointSpectralAmplitude jsa;
    if (builder == JsaBuilder::Linear) {
      jsa = compute_jsa_linear(linear_modes.n_g_pump, linear_modes.n_g_signal,
                               linear_modes.n_g_idler, process.length_mm, pump,
                               process.omega_s0, process.omega_i0, grid);
    } else {
      ProcessSpec p = process;
      if (solved_period) p.qpm_period_um = *solved_period;
      jsa = compute_jsa_full(stack, p, pump, grid);
    }
    const auto schmidt = schmidt_decompose(jsa, 1);
    const auto corr = correlation_sign(jsa);
    SweepRow row;
    row.pump_fwhm_nm = fwhm;
    row.schmidt_number = schmidt.schmidt_number;
    row.entropy_bits = schmidt.entropy_bits;
    row.rho = corr.rho;
    row.signal_fwhm_nm = marginal_bandwidth(jsa, MarginalAxis::Signal).fwhm_nm;
    row.idler_fwhm_nm = marginal_bandwidth(jsa, MarginalAxis::Idler).fwhm_nm;
    rows[r] = row;
  });
  return rows;
}

} // namespace brw
