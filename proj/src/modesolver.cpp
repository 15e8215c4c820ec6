#include "brwsim/modesolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brwsim/constants.hpp"
#include "brwsim/errors.hpp"

namespace brw {

namespace {

// Precomputed per-wavelength solver state: layer geometry and indices.
struct SolveContext {
  double k0 = 0.0; // rad/um
  double n_clad = 1.0;
  double q_clad = 1.0;
  double n_max = 0.0;
  struct Slab {
    double t = 0.0; // um
    double n = 0.0;
    double q = 1.0;
  };
  std::vector<Slab> slabs; // bottom to top
  double total_thickness = 0.0;
};

SolveContext make_context(const LayerStack& stack, double lambda_nm, Polarization pol) {
  if (!stack.material) throw Error("LayerStack has no material model attached");
  SolveContext ctx;
  ctx.k0 = kTwoPi / (lambda_nm * 1e-3);
  ctx.n_clad = stack.n_clad;
  ctx.q_clad = (pol == Polarization::TM) ? stack.n_clad * stack.n_clad : 1.0;
  auto layers = expand_layers(stack);
  ctx.slabs.reserve(layers.size());
  for (const auto& l : layers) {
    SolveContext::Slab s;
    s.t = l.thickness_um;
    s.n = refractive_index(*stack.material, l.x, lambda_nm, pol);
    s.q = (pol == Polarization::TM) ? s.n * s.n : 1.0;
    ctx.slabs.push_back(s);
    ctx.total_thickness += s.t;
    ctx.n_max = std::max(ctx.n_max, s.n);
  }
  return ctx;
}

// cos-like and sin-like solutions of u'' + m u = 0 over a distance t:
//   C = cos(sqrt(m) t) / cosh(sqrt(-m) t),  S = sin(.)/sqrt(m) | sinh(.)/sqrt(-m)
void phase_functions(double m, double t, double& C, double& S) {
  if (m > 0.0) {
    const double k = std::sqrt(m);
    C = std::cos(k * t);
    S = std::sin(k * t) / k;
  } else if (m < 0.0) {
    const double g = std::sqrt(-m);
    C = std::cosh(g * t);
    S = std::sinh(g * t) / g;
  } else {
    C = 1.0;
    S = t;
  }
}

// Transfer matrix of a single slab acting on (u, v), v = u'/q.
Eigen::Matrix2d slab_matrix(const SolveContext::Slab& s, double beta2, double k0) {
  const double m = k0 * k0 * s.n * s.n - beta2;
  double C, S;
  phase_functions(m, s.t, C, S);
  Eigen::Matrix2d M;
  M << C, s.q * S, -m * S / s.q, C;
  return M;
}

// Dispersion residual whose roots are the bound modes: start from the
// decaying solution in the bottom outer medium, propagate to the top
// interface and measure the mismatch against pure decay there. The pair
// (u, v) is rescaled along the way; rescaling by positive factors leaves
// the sign structure (and roots) unchanged.
double dispersion_residual(const SolveContext& ctx, double n_eff) {
  const double beta2 = ctx.k0 * ctx.k0 * n_eff * n_eff;
  const double g2 = beta2 - ctx.k0 * ctx.k0 * ctx.n_clad * ctx.n_clad;
  if (g2 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double gamma = std::sqrt(g2);

  double u = 1.0;
  double v = gamma / ctx.q_clad;
  for (const auto& s : ctx.slabs) {
    const double m = ctx.k0 * ctx.k0 * s.n * s.n - beta2;
    double C, S;
    phase_functions(m, s.t, C, S);
    const double u_next = C * u + s.q * S * v;
    const double v_next = -m * S / s.q * u + C * v;
    u = u_next;
    v = v_next;
    const double scale = std::max(std::abs(u), std::abs(v));
    if (scale > 1e100) {
      u /= scale;
      v /= scale;
    }
  }
  return v + gamma / ctx.q_clad * u;
}

double bisect_root(const SolveContext& ctx, double a, double b, double fa,
                   double fb, double tol) {
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = dispersion_residual(ctx, mid);
    if (fm == 0.0) return mid;
    if ((fa < 0.0) != (fm < 0.0)) {
      b = mid;
      fb = fm;
    } else {
      a = mid;
      fa = fm;
    }
  }
  (void)fb;
  return 0.5 * (a + b);
}

// March (u, v) from the bottom outer interface to the core center,
// recording per-layer entry values with a running log-scale so the
// rendered field stays continuous after overflow protection.
struct LayerTrace {
  double u0 = 0.0, v0 = 0.0; // at layer entry, divided by exp(log_scale)
  double m = 0.0, q = 1.0;
  double x_start = 0.0, t = 0.0;
  double log_scale = 0.0;
};

struct HalfTrace {
  std::vector<LayerTrace> layers; // bottom half, includes half of the core
  double gamma_clad = 0.0;
  double u_center = 0.0, v_center = 0.0;
  double log_scale_center = 0.0;
  double x_bottom = 0.0; // bottom outer interface
};

HalfTrace trace_to_center(const SolveContext& ctx, double n_eff) {
  const double beta2 = ctx.k0 * ctx.k0 * n_eff * n_eff;
  HalfTrace tr;
  tr.gamma_clad = std::sqrt(std::max(0.0, beta2 - ctx.k0 * ctx.k0 * ctx.n_clad * ctx.n_clad));
  tr.x_bottom = -0.5 * ctx.total_thickness;

  double u = 1.0, v = tr.gamma_clad / ctx.q_clad, lg = 0.0;
  double x = tr.x_bottom;
  const std::size_t n_half = ctx.slabs.size() / 2; // full layers below the core
  for (std::size_t j = 0; j <= n_half; ++j) {
    const auto& s = ctx.slabs[j];
    LayerTrace lt;
    lt.m = ctx.k0 * ctx.k0 * s.n * s.n - beta2;
    lt.q = s.q;
    lt.x_start = x;
    lt.t = (j == n_half) ? 0.5 * s.t : s.t; // stop at the core center
    lt.u0 = u;
    lt.v0 = v;
    lt.log_scale = lg;
    tr.layers.push_back(lt);

    double C, S;
    phase_functions(lt.m, lt.t, C, S);
    const double u_next = C * u + s.q * S * v;
    const double v_next = -lt.m * S / s.q * u + C * v;
    u = u_next;
    v = v_next;
    x += lt.t;
    const double scale = std::max(std::abs(u), std::abs(v));
    if (scale > 1e100) {
      u /= scale;
      v /= scale;
      lg += std::log(scale);
    }
  }
  tr.u_center = u;
  tr.v_center = v;
  tr.log_scale_center = lg;
  return tr;
}

double eval_trace(const HalfTrace& tr, double x) {
  // x must be <= 0 (bottom half up to the core center)
  if (x <= tr.x_bottom) {
    // exponential tail in the outer medium; u at the interface was 1
    return std::exp(tr.gamma_clad * (x - tr.x_bottom) - tr.log_scale_center);
  }
  std::size_t j = 0;
  while (j + 1 < tr.layers.size() && x >= tr.layers[j].x_start + tr.layers[j].t) ++j;
  const auto& lt = tr.layers[j];
  const double xi = std::clamp(x - lt.x_start, 0.0, lt.t);
  double C, S;
  phase_functions(lt.m, xi, C, S);
  const double u = C * lt.u0 + lt.q * S * lt.v0;
  return u * std::exp(lt.log_scale - tr.log_scale_center);
}

} // namespace

Eigen::Matrix2cd transfer_matrix(const LayerStack& stack, double n_eff,
                                 double lambda_nm, Polarization pol) {
  if (!(n_eff > 0.0)) throw Error("transfer_matrix: n_eff must be positive");
  const auto ctx = make_context(stack, lambda_nm, pol);
  const double beta2 = ctx.k0 * ctx.k0 * n_eff * n_eff;
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
  for (const auto& s : ctx.slabs) M = slab_matrix(s, beta2, ctx.k0) * M;
  return M.cast<std::complex<double>>();
}

std::vector<GuidedMode> find_modes(const LayerStack& stack, double lambda_nm,
                                   Polarization pol, double lo, double hi,
                                   const FindModesOptions& opts) {
  if (!(lo < hi)) throw Error("find_modes: need lo < hi");
  const auto ctx = make_context(stack, lambda_nm, pol);
  lo = std::max(lo, ctx.n_clad + 1e-6);
  const double hi_eff = std::min(hi, ctx.n_max + 0.5);
  std::vector<GuidedMode> modes;
  if (lo >= hi_eff) return modes;

  const double step = opts.scan_step;
  const int n_steps = static_cast<int>(std::ceil((hi_eff - lo) / step));
  double x_prev = lo;
  double f_prev = dispersion_residual(ctx, x_prev);
  std::vector<double> roots;
  for (int i = 1; i <= n_steps; ++i) {
    const double x = std::min(lo + i * step, hi_eff);
    const double f = dispersion_residual(ctx, x);
    if (std::isfinite(f_prev) && std::isfinite(f)) {
      if (f_prev == 0.0) {
        roots.push_back(x_prev);
      } else if ((f_prev < 0.0) != (f < 0.0)) {
        roots.push_back(bisect_root(ctx, x_prev, x, f_prev, f, opts.bisect_tol));
      }
    }
    x_prev = x;
    f_prev = f;
  }

  const double n1 = refractive_index(*stack.material, stack.x_1, lambda_nm, pol);
  const double n2 = refractive_index(*stack.material, stack.x_2, lambda_nm, pol);
  const double n_refl_min = std::min(n1, n2);

  for (double r : roots) {
    GuidedMode m;
    m.pol = pol;
    m.n_eff = r;
    m.lambda_nm = lambda_nm;
    m.beta_rad_per_um = kTwoPi * r / (lambda_nm * 1e-3);
    m.mode_class = (r > n_refl_min) ? ModeClass::TIR : ModeClass::Bragg;
    if (opts.with_profiles) field_profile(stack, m, opts.profile_dx_um);
    modes.push_back(std::move(m));
  }
  std::sort(modes.begin(), modes.end(),
            [](const GuidedMode& a, const GuidedMode& b) { return a.n_eff > b.n_eff; });
  return modes;
}

void field_profile(const LayerStack& stack, GuidedMode& mode, double dx_um) {
  const auto ctx = make_context(stack, mode.lambda_nm, mode.pol);
  const double pad = 2.0; // um of outer medium on each side
  const double half_span = 0.5 * ctx.total_thickness + pad;
  if (dx_um <= 0.0) dx_um = 2e-3;
  const int n_half = static_cast<int>(std::ceil(half_span / dx_um));
  const int n = 2 * n_half + 1;

  ModeGrid grid;
  grid.dx_um = dx_um;
  grid.n = n;
  grid.x0_um = -n_half * dx_um;

  const auto tr = trace_to_center(ctx, mode.n_eff);

  // parity from the center values: an even mode has u' = 0 there
  const double beta2 = ctx.k0 * ctx.k0 * mode.n_eff * mode.n_eff;
  const double m_core = ctx.k0 * ctx.k0 * ctx.slabs[ctx.slabs.size() / 2].n *
                            ctx.slabs[ctx.slabs.size() / 2].n - beta2;
  const double kappa_ref = std::max({std::sqrt(std::abs(m_core)), ctx.k0, 1.0});
  const int parity = (std::abs(tr.v_center) < std::abs(tr.u_center) * kappa_ref) ? +1 : -1;

  Eigen::ArrayXd u(n);
  for (int k = 0; k <= n_half; ++k) u[k] = eval_trace(tr, grid.x(k));
  for (int k = n_half + 1; k < n; ++k) u[k] = parity * u[2 * n_half - k];

  // L2-normalize on the grid and fix the overall sign
  const double norm2 = (u * u).sum() * dx_um;
  u /= std::sqrt(norm2);
  double peak = 0.0;
  int peak_idx = 0;
  for (int k = 0; k < n; ++k) {
    if (std::abs(u[k]) > peak) {
      peak = std::abs(u[k]);
      peak_idx = k;
    }
  }
  if (u[peak_idx] < 0.0) u = -u;

  double core2 = 0.0;
  const double half_core = 0.5 * stack.t_c_nm * 1e-3;
  for (int k = 0; k < n; ++k)
    if (std::abs(grid.x(k)) <= half_core) core2 += u[k] * u[k];
  core2 *= dx_um;

  mode.profile = std::move(u);
  mode.grid = grid;
  mode.parity = parity;
  mode.core_fraction = core2;
}

GroupIndexResult group_index_of(const std::function<double(double)>& n_eff_of,
                                double lambda_nm, double h) {
  const double ne0 = n_eff_of(lambda_nm);
  const double d1 = (n_eff_of(lambda_nm + h) - n_eff_of(lambda_nm - h)) / (2.0 * h);
  const double d2 = (n_eff_of(lambda_nm + 0.5 * h) - n_eff_of(lambda_nm - 0.5 * h)) / h;
  const double richardson = (4.0 * d2 - d1) / 3.0;
  GroupIndexResult r;
  r.n_g = ne0 - lambda_nm * richardson;
  r.error_estimate = (4.0 / 3.0) * lambda_nm * std::abs(d1 - d2) + 1e-9;
  return r;
}

GroupIndexResult group_index(const LayerStack& stack, const GuidedMode& mode,
                             double delta_lambda_nm) {
  ModeTracker tracker(stack, mode.pol, mode.lambda_nm, mode.n_eff);
  auto fn = [&tracker](double lambda_nm) { return tracker.n_eff_at(lambda_nm); };
  return group_index_of(fn, mode.lambda_nm, delta_lambda_nm);
}

std::array<double, 2> quarter_wave_deviation(const LayerStack& stack,
                                             double lambda_nm, double n_eff,
                                             Polarization pol) {
  const double k0 = kTwoPi / (lambda_nm * 1e-3);
  std::array<double, 2> dev{};
  const double thicknesses[2] = {stack.t_1_nm * 1e-3, stack.t_2_nm * 1e-3};
  const double fractions[2] = {stack.x_1, stack.x_2};
  for (int i = 0; i < 2; ++i) {
    const double ni = refractive_index(*stack.material, fractions[i], lambda_nm, pol);
    const double kappa = k0 * std::sqrt(std::abs(ni * ni - n_eff * n_eff));
    dev[i] = thicknesses[i] * kappa / (0.5 * kPi) - 1.0;
  }
  return dev;
}

ModeTracker::ModeTracker(const LayerStack& stack, Polarization pol,
                         double lambda0_nm, double n_eff0)
    : stack_(stack), pol_(pol) {
  solved_[lambda0_nm] = n_eff0;
}

double ModeTracker::n_eff_at(double lambda_nm) {
  // wavelengths closer than 1e-9 nm count as already solved
  auto upper = solved_.lower_bound(lambda_nm);
  if (upper != solved_.end() && upper->first - lambda_nm < 1e-9) return upper->second;
  if (upper != solved_.begin() && lambda_nm - std::prev(upper)->first < 1e-9)
    return std::prev(upper)->second;

  // predict from the nearest solved points: interpolation when bracketed,
  // linear extrapolation otherwise. Extrapolation needs a baseline wide
  // enough that the bisection jitter of the reference points cannot
  // produce a spurious slope.
  constexpr double kMinBaseline_nm = 1e-4;
  double predicted;
  double nearest_ne;
  if (upper == solved_.end()) {
    auto last = std::prev(upper);
    nearest_ne = last->second;
    predicted = last->second;
    if (solved_.size() >= 2) {
      auto prev = std::prev(last);
      if (last->first - prev->first > kMinBaseline_nm) {
        const double slope = (last->second - prev->second) / (last->first - prev->first);
        predicted = last->second + slope * (lambda_nm - last->first);
      }
    }
  } else if (upper == solved_.begin()) {
    nearest_ne = upper->second;
    predicted = upper->second;
    if (solved_.size() >= 2) {
      auto next = std::next(upper);
      if (next->first - upper->first > kMinBaseline_nm) {
        const double slope = (next->second - upper->second) / (next->first - upper->first);
        predicted = upper->second + slope * (lambda_nm - upper->first);
      }
    }
  } else {
    auto lowit = std::prev(upper);
    const double t = (lambda_nm - lowit->first) / (upper->first - lowit->first);
    predicted = (1.0 - t) * lowit->second + t * upper->second;
    nearest_ne = (t < 0.5) ? lowit->second : upper->second;
  }

  const auto ctx = make_context(stack_, lambda_nm, pol_);
  const double floor_ne = ctx.n_clad + 1e-6;
  if (predicted < floor_ne) predicted = floor_ne;

  // fine outward scan from the prediction; in Bragg stacks neighboring
  // roots can sit ~1e-3 apart, so a symmetric expanding bracket may
  // enclose an even number of roots and never see a sign change
  const double fine = 1e-5;
  const int max_steps = 2000; // +-0.02 around the prediction
  const double f_pred = dispersion_residual(ctx, predicted);
  double up_x = predicted, up_f = f_pred;
  double dn_x = predicted, dn_f = f_pred;
  double root = std::numeric_limits<double>::quiet_NaN();
  if (f_pred == 0.0) root = predicted;
  for (int k = 1; k <= max_steps && !std::isfinite(root); ++k) {
    const double xu = predicted + k * fine;
    const double fu = dispersion_residual(ctx, xu);
    if (std::isfinite(up_f) && std::isfinite(fu) && (up_f < 0.0) != (fu < 0.0)) {
      root = bisect_root(ctx, up_x, xu, up_f, fu, 1e-12);
      break;
    }
    up_x = xu;
    up_f = fu;
    const double xd = predicted - k * fine;
    if (xd > floor_ne) {
      const double fd = dispersion_residual(ctx, xd);
      if (std::isfinite(dn_f) && std::isfinite(fd) && (dn_f < 0.0) != (fd < 0.0)) {
        root = bisect_root(ctx, xd, dn_x, fd, dn_f, 1e-12);
        break;
      }
      dn_x = xd;
      dn_f = fd;
    }
  }
  if (!std::isfinite(root))
    throw TrackingError("mode tracking lost the root near n_eff=" + std::to_string(predicted) +
                        " at lambda=" + std::to_string(lambda_nm) + " nm");
  if (std::abs(root - nearest_ne) > 0.05)
    throw TrackingError("mode identity jump: n_eff moved by " +
                        std::to_string(std::abs(root - nearest_ne)) + " at lambda=" +
                        std::to_string(lambda_nm) + " nm");
  solved_[lambda_nm] = root;
  return root;
}

double ModeTracker::beta_at_omega(double omega) {
  const double lambda_nm = lambda_nm_from_omega(omega);
  const double n_eff = n_eff_at(lambda_nm);
  return n_eff * omega / kSpeedOfLight; // rad/m
}

const GuidedMode* select_mode(const std::vector<GuidedMode>& modes, ModeClass cls) {
  const GuidedMode* best = nullptr;
  for (const auto& m : modes) {
    if (m.mode_class != cls) continue;
    if (!best || m.core_fraction > best->core_fraction) best = &m;
  }
  return best;
}

} // namespace brw
