#include "brwsim/spdc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brwsim/constants.hpp"
#include "brwsim/errors.hpp"

namespace brw {

namespace {

// 1/e amplitude half-width <-> intensity FWHM of exp(-W^2/dw^2)
constexpr double kFwhmFactor = 1.1774100225154747; // 2 sqrt(ln 2 / 2)

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& axis) {
  const int n = static_cast<int>(axis.size());
  Eigen::VectorXd w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  const double d = axis[1] - axis[0];
  w.setConstant(d);
  w[0] = 0.5 * d;
  w[n - 1] = 0.5 * d;
  return w;
}

} // namespace

PumpSpec PumpSpec::from_fwhm_nm(double lambda0_nm, double fwhm_nm) {
  if (!(fwhm_nm > 0.0)) throw Error("pump bandwidth must be > 0");
  const double lambda_m = lambda0_nm * 1e-9;
  const double fwhm_omega = kTwoPi * kSpeedOfLight * (fwhm_nm * 1e-9) / (lambda_m * lambda_m);
  PumpSpec p;
  p.lambda0_nm = lambda0_nm;
  p.delta_omega = fwhm_omega / kFwhmFactor;
  return p;
}

double PumpSpec::fwhm_nm() const {
  const double lambda_m = lambda0_nm * 1e-9;
  const double fwhm_omega = delta_omega * kFwhmFactor;
  return fwhm_omega * lambda_m * lambda_m / (kTwoPi * kSpeedOfLight) * 1e9;
}

double ProcessSpec::lambda_p0_nm() const { return lambda_nm_from_omega(omega_p0()); }
double ProcessSpec::lambda_s0_nm() const { return lambda_nm_from_omega(omega_s0); }
double ProcessSpec::lambda_i0_nm() const { return lambda_nm_from_omega(omega_i0); }

ProcessSpec ProcessSpec::degenerate(double lambda_pair_nm, double length_mm) {
  ProcessSpec p;
  p.omega_s0 = omega_from_lambda_nm(lambda_pair_nm);
  p.omega_i0 = p.omega_s0;
  p.length_mm = length_mm;
  return p;
}

Eigen::VectorXd JointSpectralAmplitude::weights_s() const { return trapezoid_weights(omega_s); }
Eigen::VectorXd JointSpectralAmplitude::weights_i() const { return trapezoid_weights(omega_i); }

double JointSpectralAmplitude::norm() const {
  const Eigen::VectorXd ws = weights_s();
  const Eigen::VectorXd wi = weights_i();
  double total = 0.0;
  for (int k = 0; k < amplitude.rows(); ++k) {
    double row = 0.0;
    for (int l = 0; l < amplitude.cols(); ++l) row += std::norm(amplitude(k, l)) * wi[l];
    total += row * ws[k];
  }
  return std::sqrt(total);
}

void JointSpectralAmplitude::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw NumericalError("cannot normalize an identically zero JSA");
  amplitude /= n;
}

ProcessModes solve_process_modes(const LayerStack& stack, const ProcessSpec& process,
                                 bool with_group_index) {
  struct Role {
    const char* name;
    ModeSelector sel;
    double lambda_nm;
  };
  const Role roles[3] = {
      {"pump", process.pump, process.lambda_p0_nm()},
      {"signal", process.signal, process.lambda_s0_nm()},
      {"idler", process.idler, process.lambda_i0_nm()},
  };

  ProcessModes out;
  GuidedMode* slots[3] = {&out.pump, &out.signal, &out.idler};
  double* ng_slots[3] = {&out.n_g_pump, &out.n_g_signal, &out.n_g_idler};

  for (int r = 0; r < 3; ++r) {
    const auto& role = roles[r];
    auto modes = find_modes(stack, role.lambda_nm, role.sel.pol, stack.n_clad + 0.02, 5.0);
    const GuidedMode* picked = select_mode(modes, role.sel.cls);
    if (!picked)
      throw NumericalError(std::string("required ") + role.name + " mode (" +
                           to_string(role.sel.pol) + ", " + to_string(role.sel.cls) +
                           ") does not exist at " + std::to_string(role.lambda_nm) + " nm");
    *slots[r] = *picked;
    if (with_group_index) *ng_slots[r] = group_index(stack, *picked).n_g;
  }
  return out;
}

double qpm_period(const LayerStack& stack, const ProcessSpec& process, bool* sign_flipped) {
  const auto modes = solve_process_modes(stack, process, /*with_group_index=*/false);
  const double beta_p = modes.pump.n_eff * process.omega_p0() / kSpeedOfLight;
  const double beta_s = modes.signal.n_eff * process.omega_s0 / kSpeedOfLight;
  const double beta_i = modes.idler.n_eff * process.omega_i0 / kSpeedOfLight;
  const double delta_k = beta_p - beta_s - beta_i; // rad/m
  if (std::abs(delta_k) * 1e-6 < 1e-12)
    throw AlreadyPhaseMatched("process is already phase matched (QPM period unbounded)");
  if (sign_flipped) *sign_flipped = delta_k < 0.0;
  return kTwoPi / std::abs(delta_k) * 1e6; // um
}

double phase_mismatch(const LayerStack& stack, const ProcessSpec& process,
                      double Omega_s, double Omega_i) {
  const auto modes = solve_process_modes(stack, process, /*with_group_index=*/false);
  ModeTracker tp(stack, process.pump.pol, modes.pump.lambda_nm, modes.pump.n_eff);
  ModeTracker ts(stack, process.signal.pol, modes.signal.lambda_nm, modes.signal.n_eff);
  ModeTracker ti(stack, process.idler.pol, modes.idler.lambda_nm, modes.idler.n_eff);

  const double beta_p = tp.beta_at_omega(process.omega_p0() + Omega_s + Omega_i);
  const double beta_s = ts.beta_at_omega(process.omega_s0 + Omega_s);
  const double beta_i = ti.beta_at_omega(process.omega_i0 + Omega_i);
  double mismatch = beta_p - beta_s - beta_i; // rad/m
  double period_um;
  if (process.qpm_period_um) {
    period_um = *process.qpm_period_um;
  } else if (stack.qpm_period_um) {
    period_um = *stack.qpm_period_um;
  } else {
    period_um = qpm_period(stack, process);
  }
  if (std::isfinite(period_um)) mismatch -= kTwoPi / (period_um * 1e-6);
  return mismatch * 1e-6; // rad/um
}

JointSpectralAmplitude compute_jsa_from_dispersion(const DispersionBundle& dispersion,
                                                   double qpm_period_um,
                                                   double length_mm,
                                                   const PumpSpec& pump,
                                                   double omega_s0, double omega_i0,
                                                   const GridSpec& grid) {
  if (grid.n < 2) throw Error("JSA grid needs at least 2 points per axis");
  if (!grid.span) throw Error("compute_jsa_from_dispersion requires an explicit grid span");
  const int n = grid.n;
  const double span = *grid.span;
  const double L = length_mm * 1e-3;
  const double k_qpm = std::isfinite(qpm_period_um) ? kTwoPi / (qpm_period_um * 1e-6) : 0.0;

  JointSpectralAmplitude jsa;
  jsa.omega_s0 = omega_s0;
  jsa.omega_i0 = omega_i0;
  jsa.omega_s = Eigen::VectorXd::LinSpaced(n, -span, span);
  jsa.omega_i = Eigen::VectorXd::LinSpaced(n, -span, span);
  jsa.amplitude.resize(n, n);

  // beta samples along the axes; the pump is sampled on the (2n-1)-point
  // sum grid Omega_s + Omega_i, exact because both axes share one step.
  const double omega_p0 = omega_s0 + omega_i0;
  const double beta_p0 = dispersion.beta_p(omega_p0);
  const double beta_s0 = dispersion.beta_s(omega_s0);
  const double beta_i0 = dispersion.beta_i(omega_i0);

  // center-outward evaluation keeps warm-started trackers on the branch
  auto sample = [](const std::function<double(double)>& f, double omega0,
                   const Eigen::VectorXd& detunings) {
    const int m = static_cast<int>(detunings.size());
    Eigen::VectorXd out(m);
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(detunings[a]) < std::abs(detunings[b]);
    });
    for (int idx : order) out[idx] = f(omega0 + detunings[idx]);
    return out;
  };

  Eigen::VectorXd sum_grid(2 * n - 1);
  const double step = jsa.omega_s[1] - jsa.omega_s[0];
  for (int m = 0; m < 2 * n - 1; ++m) sum_grid[m] = jsa.omega_s[0] + jsa.omega_i[0] + m * step;

  // where the pump envelope is below 1e-14 the amplitude is zero anyway;
  // skip those sum frequencies so the pump ray is never tracked into far
  // spectral corners that contribute nothing
  const double inv_dw2 = 1.0 / (pump.delta_omega * pump.delta_omega);
  constexpr double kEnvelopeCutoff = 1e-14;
  const double sum_cut = pump.delta_omega * std::sqrt(-std::log(kEnvelopeCutoff));
  std::vector<bool> pump_alive(2 * n - 1);
  for (int m = 0; m < 2 * n - 1; ++m) pump_alive[m] = std::abs(sum_grid[m]) <= sum_cut;

  const Eigen::VectorXd beta_s = sample(dispersion.beta_s, omega_s0, jsa.omega_s);
  const Eigen::VectorXd beta_i = sample(dispersion.beta_i, omega_i0, jsa.omega_i);
  Eigen::VectorXd beta_p = Eigen::VectorXd::Zero(2 * n - 1);
  {
    std::vector<int> order;
    for (int m = 0; m < 2 * n - 1; ++m)
      if (pump_alive[m]) order.push_back(m);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(sum_grid[a]) < std::abs(sum_grid[b]);
    });
    for (int m : order) beta_p[m] = dispersion.beta_p(omega_p0 + sum_grid[m]);
  }

  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      if (!pump_alive[k + l]) {
        jsa.amplitude(k, l) = 0.0;
        continue;
      }
      const double sum = jsa.omega_s[k] + jsa.omega_i[l];
      const double bp = beta_p[k + l];
      const double mismatch = bp - beta_s[k] - beta_i[l] - k_qpm;
      const double s_k_detuned = (bp - beta_p0) + (beta_s[k] - beta_s0) + (beta_i[l] - beta_i0);
      const double envelope = std::exp(-sum * sum * inv_dw2);
      const double amp = envelope * sinc(0.5 * mismatch * L);
      jsa.amplitude(k, l) = std::polar(amp, 0.5 * s_k_detuned * L);
    }
  }
  jsa.normalize();
  return jsa;
}

namespace {

// Half-width of the JSA support per axis: bounding box of the region
// where both the pump envelope (|sum| < 4 dw) and the sinc ridge
// (|arg| < 4 pi) are significant.
double auto_span(double n_g_pump, double n_g_signal, double n_g_idler,
                 double length_mm, double delta_omega) {
  const double L = length_mm * 1e-3;
  const double a_s = (n_g_pump - n_g_signal) / kSpeedOfLight * 0.5 * L;
  const double a_i = (n_g_pump - n_g_idler) / kSpeedOfLight * 0.5 * L;
  const double det = std::abs(a_i - a_s);
  const double a_ref = std::max(std::abs(a_s), std::abs(a_i));
  const double cap = 20.0 * delta_omega + (a_ref > 0.0 ? 8.0 * kPi / a_ref : 0.0);
  if (det < 1e-3 * a_ref || det == 0.0) return cap;
  const double span = (a_ref * 4.0 * delta_omega + 4.0 * kPi) / det;
  return std::min(span, cap);
}

} // namespace

JointSpectralAmplitude compute_jsa_full(const LayerStack& stack,
                                        const ProcessSpec& process,
                                        const PumpSpec& pump,
                                        const GridSpec& grid) {
  const auto modes = solve_process_modes(stack, process, /*with_group_index=*/true);

  GridSpec g = grid;
  std::vector<std::string> warnings;
  if (!g.span) {
    double span = auto_span(modes.n_g_pump, modes.n_g_signal, modes.n_g_idler,
                            process.length_mm, pump.delta_omega);
    // clamp so every tracked wavelength stays inside material validity
    const auto& mat = *stack.material;
    const double margin_nm = 10.0;
    const double omega_hi = omega_from_lambda_nm(mat.lambda_min_nm + margin_nm);
    const double omega_lo = omega_from_lambda_nm(mat.lambda_max_nm - margin_nm);
    const double cap_s = std::min(omega_hi - process.omega_s0, process.omega_s0 - omega_lo);
    const double cap_i = std::min(omega_hi - process.omega_i0, process.omega_i0 - omega_lo);
    const double cap_p = 0.5 * std::min(omega_hi - process.omega_p0(), process.omega_p0() - omega_lo);
    const double cap = std::min({cap_s, cap_i, cap_p});
    if (cap <= 0.0)
      throw NumericalError("central frequencies are outside the material validity range");
    if (span > cap) {
      warnings.push_back("JSA grid span clamped from " + std::to_string(span) + " to " +
                         std::to_string(cap) + " rad/s by the material validity range");
      span = cap;
      if (span < 2.5 * pump.delta_omega)
        throw NumericalError("grid too wide for the material validity range: the pump corner at " +
                             std::to_string(lambda_nm_from_omega(process.omega_p0() + 2.0 * span)) +
                             " nm cannot be tracked");
    }
    g.span = span;
  }

  double period_um;
  if (process.qpm_period_um) {
    period_um = *process.qpm_period_um;
  } else {
    period_um = qpm_period(stack, process);
  }

  ModeTracker tp(stack, process.pump.pol, modes.pump.lambda_nm, modes.pump.n_eff);
  ModeTracker ts(stack, process.signal.pol, modes.signal.lambda_nm, modes.signal.n_eff);
  ModeTracker ti(stack, process.idler.pol, modes.idler.lambda_nm, modes.idler.n_eff);

  DispersionBundle dispersion;
  auto wrap = [](ModeTracker& tracker, const char* role) {
    return [&tracker, role](double omega) {
      try {
        return tracker.beta_at_omega(omega);
      } catch (const TrackingError& e) {
        throw NumericalError(std::string("grid too wide for mode tracking: ") + role +
                             " at " + std::to_string(lambda_nm_from_omega(omega)) +
                             " nm: " + e.what());
      }
    };
  };
  dispersion.beta_p = wrap(tp, "pump");
  dispersion.beta_s = wrap(ts, "signal");
  dispersion.beta_i = wrap(ti, "idler");

  auto jsa = compute_jsa_from_dispersion(dispersion, period_um, process.length_mm, pump,
                                         process.omega_s0, process.omega_i0, g);
  jsa.warnings.insert(jsa.warnings.end(), warnings.begin(), warnings.end());
  return jsa;
}

JointSpectralAmplitude compute_jsa_linear(double n_g_pump, double n_g_signal,
                                          double n_g_idler, double length_mm,
                                          const PumpSpec& pump,
                                          double omega_s0, double omega_i0,
                                          const GridSpec& grid) {
  if (!(length_mm > 0.0)) throw Error("interaction length must be > 0");
  if (!std::isfinite(n_g_pump + n_g_signal + n_g_idler))
    throw Error("group indices must be finite");

  GridSpec g = grid;
  if (!g.span)
    g.span = auto_span(n_g_pump, n_g_signal, n_g_idler, length_mm, pump.delta_omega);

  const int n = g.n;
  const double span = *g.span;
  const double L = length_mm * 1e-3;
  const double N_p = n_g_pump / kSpeedOfLight;
  const double N_s = n_g_signal / kSpeedOfLight;
  const double N_i = n_g_idler / kSpeedOfLight;

  JointSpectralAmplitude jsa;
  jsa.omega_s0 = omega_s0;
  jsa.omega_i0 = omega_i0;
  jsa.omega_s = Eigen::VectorXd::LinSpaced(n, -span, span);
  jsa.omega_i = Eigen::VectorXd::LinSpaced(n, -span, span);
  jsa.amplitude.resize(n, n);

  const double inv_dw2 = 1.0 / (pump.delta_omega * pump.delta_omega);
  for (int k = 0; k < n; ++k) {
    const double ws = jsa.omega_s[k];
    for (int l = 0; l < n; ++l) {
      const double wi = jsa.omega_i[l];
      const double sum = ws + wi;
      const double envelope = std::exp(-sum * sum * inv_dw2);
      const double sinc_arg = ((N_p - N_s) * ws + (N_p - N_i) * wi) * 0.5 * L;
      const double phase = ((N_p + N_s) * ws + (N_p + N_i) * wi) * 0.5 * L;
      jsa.amplitude(k, l) = std::polar(envelope * sinc(sinc_arg), phase);
    }
  }
  jsa.normalize();
  return jsa;
}

OverlapResult mode_overlap(const Eigen::ArrayXd& u_p, const Eigen::ArrayXd& u_s,
                           const Eigen::ArrayXd& u_i, double dx_um) {
  if (u_p.size() != u_s.size() || u_p.size() != u_i.size())
    throw Error("mode_overlap: profiles do not share a grid");
  if (!(dx_um > 0.0)) throw Error("mode_overlap: grid spacing must be > 0");
  OverlapResult r;
  r.gamma_per_sqrt_um = (u_p * u_s * u_i).sum() * dx_um;
  const double p4 = (u_p * u_p * u_p * u_p).sum() * dx_um;
  r.gamma_hat = r.gamma_per_sqrt_um / std::sqrt(p4);
  r.percent = 100.0 * r.gamma_hat;
  return r;
}

double optimal_pump_bandwidth(double n_g_pump, double n_g_signal,
                              double n_g_idler, double length_mm) {
  constexpr double alpha = 0.439;
  const double N_p = n_g_pump / kSpeedOfLight;
  const double N_s = n_g_signal / kSpeedOfLight;
  const double N_i = n_g_idler / kSpeedOfLight;
  const double product = (N_s - N_p) * (N_p - N_i);
  if (!(product > 0.0))
    throw NumericalError("no symmetric separability point: the pump group index "
                         "must lie strictly between signal and idler");
  const double L = length_mm * 1e-3;
  return 2.0 / (alpha * L * std::sqrt(product));
}

} // namespace brw
