#include "brwsim/cli_commands.hpp"

#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "brwsim/constants.hpp"
#include "brwsim/errors.hpp"
#include "brwsim/io.hpp"
#include "brwsim/optimizer.hpp"

namespace brw::cli {

namespace {

struct LoadedInputs {
  LayerStack stack;
  std::shared_ptr<const MaterialModel> material;
  ProcessSpec process;
};

LoadedInputs load_inputs(const CommonOptions& opts) {
  LoadedInputs in;
  auto material = std::make_shared<MaterialModel>(load_material(opts.material_path));
  for (const auto& w : material->warnings) std::cerr << "warning: " << w << "\n";
  in.material = material;
  in.stack = load_structure(opts.structure_path);
  in.stack.material = in.material;
  in.process = ProcessSpec::degenerate(opts.lambda_pair_nm, in.stack.length_mm);
  if (opts.use_file_qpm && in.stack.qpm_period_um)
    in.process.qpm_period_um = in.stack.qpm_period_um;
  return in;
}

std::filesystem::path prepare_out_dir(const CommonOptions& opts) {
  std::filesystem::path dir(opts.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

RunManifest start_manifest(const std::string& command, const CommonOptions& opts,
                           const nlohmann::json& extra_config) {
  RunManifest m;
  m.command = command;
  m.version = kVersion;
  m.inputs.push_back({opts.material_path, file_hash_hex(opts.material_path)});
  if (!opts.structure_path.empty())
    m.inputs.push_back({opts.structure_path, file_hash_hex(opts.structure_path)});
  nlohmann::json cfg = extra_config;
  cfg["grid_n"] = opts.grid_n;
  cfg["seed"] = opts.seed;
  cfg["threads"] = resolved_threads(opts);
  cfg["lambda_pair_nm"] = opts.lambda_pair_nm;
  m.config_json = cfg.dump();
  return m;
}

double velocity_over_c(double n_g) { return 1.0 / n_g; }

} // namespace

int resolved_threads(const CommonOptions& opts) {
  if (opts.threads > 0) return opts.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_modes(const CommonOptions& opts, double lambda_nm, Polarization pol,
              double lo, double hi) {
  if (!(lambda_nm > 0.0) || !(lo < hi)) {
    std::cerr << "error: need a positive wavelength and lo < hi\n";
    return kUsageError;
  }
  const auto in = load_inputs(opts);
  const auto dir = prepare_out_dir(opts);
  auto manifest = start_manifest("modes", opts,
                                 {{"lambda_nm", lambda_nm},
                                  {"pol", to_string(pol)},
                                  {"n_eff_range", {lo, hi}}});

  const auto modes = find_modes(in.stack, lambda_nm, pol, lo, hi);

  std::ofstream table(dir / "modes.tsv");
  table.precision(12);
  table << "index\tpol\tclass\tn_eff\tbeta_rad_um\tn_g\tcore_fraction\tparity\n";
  std::cout << "# " << modes.size() << " mode(s) at " << lambda_nm << " nm, "
            << to_string(pol) << "\n";
  std::cout << "index\tclass\tn_eff\tn_g\tcore_fraction\n";
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    double n_g = std::numeric_limits<double>::quiet_NaN();
    try {
      n_g = group_index(in.stack, m).n_g;
    } catch (const TrackingError&) {
      // leave NaN; reported as such
    }
    table << i << '\t' << to_string(m.pol) << '\t' << to_string(m.mode_class) << '\t'
          << m.n_eff << '\t' << m.beta_rad_per_um << '\t' << n_g << '\t'
          << m.core_fraction << '\t' << m.parity << '\n';
    std::cout << i << '\t' << to_string(m.mode_class) << '\t' << m.n_eff << '\t' << n_g
              << '\t' << m.core_fraction << '\n';

    char name[32];
    std::snprintf(name, sizeof(name), "profile_%02zu.tsv", i);
    write_mode_profile(m, dir / name);
    manifest.outputs.push_back(name);
  }
  manifest.outputs.push_back("modes.tsv");
  write_manifest(manifest, dir);
  return kOk;
}

int cmd_qpm(const CommonOptions& opts) {
  const auto in = load_inputs(opts);
  const auto dir = prepare_out_dir(opts);
  auto manifest = start_manifest("qpm", opts, {});

  const auto modes = solve_process_modes(in.stack, in.process, /*with_group_index=*/true);
  bool flipped = false;
  const double period = qpm_period(in.stack, in.process, &flipped);

  std::ofstream out(dir / "qpm.tsv");
  out.precision(12);
  out << "quantity\tvalue\n";
  out << "qpm_period_um\t" << period << "\n";
  if (in.stack.qpm_period_um) out << "file_qpm_period_um\t" << *in.stack.qpm_period_um << "\n";
  out << "qpm_sign_flipped\t" << (flipped ? 1 : 0) << "\n";

  struct Row {
    const char* role;
    const GuidedMode* mode;
    double n_g;
  } rows[3] = {{"pump", &modes.pump, modes.n_g_pump},
               {"signal", &modes.signal, modes.n_g_signal},
               {"idler", &modes.idler, modes.n_g_idler}};
  std::cout << "QPM period: " << period << " um";
  if (in.stack.qpm_period_um) std::cout << " (structure file: " << *in.stack.qpm_period_um << " um)";
  std::cout << "\nrole\tpol\tclass\tlambda_nm\tn_eff\tn_g\tv_over_c\n";
  for (const auto& r : rows) {
    out << r.role << "_n_eff\t" << r.mode->n_eff << "\n";
    out << r.role << "_n_g\t" << r.n_g << "\n";
    out << r.role << "_v_over_c\t" << velocity_over_c(r.n_g) << "\n";
    std::cout << r.role << '\t' << to_string(r.mode->pol) << '\t'
              << to_string(r.mode->mode_class) << '\t' << r.mode->lambda_nm << '\t'
              << r.mode->n_eff << '\t' << r.n_g << '\t' << velocity_over_c(r.n_g) << "\n";
  }
  const auto qw = quarter_wave_deviation(in.stack, modes.signal.lambda_nm,
                                         modes.signal.n_eff, modes.signal.pol);
  out << "quarter_wave_deviation_layer1\t" << qw[0] << "\n";
  out << "quarter_wave_deviation_layer2\t" << qw[1] << "\n";
  std::cout << "quarter-wave deviation (signal): layer1 " << qw[0] << ", layer2 " << qw[1] << "\n";

  manifest.outputs.push_back("qpm.tsv");
  write_manifest(manifest, dir);
  return kOk;
}

int cmd_overlap(const CommonOptions& opts) {
  const auto in = load_inputs(opts);
  const auto dir = prepare_out_dir(opts);
  auto manifest = start_manifest("overlap", opts, {});

  const auto modes = solve_process_modes(in.stack, in.process, /*with_group_index=*/false);
  const auto overlap = mode_overlap(modes.pump.profile, modes.signal.profile,
                                    modes.idler.profile, modes.pump.grid.dx_um);

  std::ofstream out(dir / "overlap.tsv");
  out.precision(12);
  out << "quantity\tvalue\n";
  out << "gamma_per_sqrt_um\t" << overlap.gamma_per_sqrt_um << "\n";
  out << "gamma_hat\t" << overlap.gamma_hat << "\n";
  out << "percent\t" << overlap.percent << "\n";
  std::cout << "overlap Gamma = " << overlap.gamma_per_sqrt_um << " um^-1/2, "
            << "dimensionless " << overlap.gamma_hat << " (" << overlap.percent << " %)\n";

  manifest.outputs.push_back("overlap.tsv");
  write_manifest(manifest, dir);
  return kOk;
}

int cmd_analyze(const CommonOptions& opts, double pump_fwhm_nm, JsaBuilder builder) {
  if (!(pump_fwhm_nm > 0.0)) {
    std::cerr << "error: pump bandwidth must be > 0 nm\n";
    return kUsageError;
  }
  const auto in = load_inputs(opts);
  const auto dir = prepare_out_dir(opts);
  auto manifest = start_manifest("analyze", opts,
                                 {{"pump_fwhm_nm", pump_fwhm_nm},
                                  {"builder", builder == JsaBuilder::Full ? "full" : "linear"}});

  const auto modes = solve_process_modes(in.stack, in.process, /*with_group_index=*/true);
  const PumpSpec pump = PumpSpec::from_fwhm_nm(in.process.lambda_p0_nm(), pump_fwhm_nm);

  double period = 0.0;
  ProcessSpec process = in.process;
  if (!process.qpm_period_um) {
    period = qpm_period(in.stack, in.process);
    process.qpm_period_um = period;
  } else {
    period = *process.qpm_period_um;
  }

  GridSpec grid;
  grid.n = opts.grid_n;
  JointSpectralAmplitude jsa;
  if (builder == JsaBuilder::Full) {
    jsa = compute_jsa_full(in.stack, process, pump, grid);
  } else {
    jsa = compute_jsa_linear(modes.n_g_pump, modes.n_g_signal, modes.n_g_idler,
                             process.length_mm, pump, process.omega_s0, process.omega_i0, grid);
  }
  for (const auto& w : jsa.warnings) std::cerr << "warning: " << w << "\n";

  const auto schmidt = schmidt_decompose(jsa, 16);
  const auto corr = correlation_sign(jsa);
  const auto fw_s = marginal_bandwidth(jsa, MarginalAxis::Signal);
  const auto fw_i = marginal_bandwidth(jsa, MarginalAxis::Idler);
  const auto overlap = mode_overlap(modes.pump.profile, modes.signal.profile,
                                    modes.idler.profile, modes.pump.grid.dx_um);

  std::ofstream report(dir / "report.txt");
  report.precision(9);
  auto emit = [&](const std::string& line) {
    report << line << "\n";
    std::cout << line << "\n";
  };
  std::ostringstream os;
  os.precision(9);
  auto fmt = [&os](auto&&... parts) {
    os.str("");
    (os << ... << parts);
    return os.str();
  };
  emit(fmt("structure            : ", opts.structure_path));
  emit(fmt("pump FWHM            : ", pump_fwhm_nm, " nm (delta_omega = ", pump.delta_omega, " rad/s)"));
  emit(fmt("builder              : ", builder == JsaBuilder::Full ? "full" : "linear"));
  emit(fmt("QPM period           : ", period, " um"));
  emit(fmt("group velocity pump  : ", velocity_over_c(modes.n_g_pump), " c (n_g = ", modes.n_g_pump, ")"));
  emit(fmt("group velocity signal: ", velocity_over_c(modes.n_g_signal), " c (n_g = ", modes.n_g_signal, ")"));
  emit(fmt("group velocity idler : ", velocity_over_c(modes.n_g_idler), " c (n_g = ", modes.n_g_idler, ")"));
  emit(fmt("Schmidt number K     : ", schmidt.schmidt_number));
  emit(fmt("purity               : ", schmidt.purity));
  emit(fmt("entropy E            : ", schmidt.entropy_bits, " bits"));
  emit(fmt("Pearson rho          : ", corr.rho, " (", to_string(corr.sign), ")"));
  emit(fmt("signal FWHM          : ", fw_s.fwhm_nm, " nm", fw_s.multi_peaked ? " [multi-peaked]" : ""));
  emit(fmt("idler FWHM           : ", fw_i.fwhm_nm, " nm", fw_i.multi_peaked ? " [multi-peaked]" : ""));
  emit(fmt("overlap Gamma        : ", overlap.gamma_per_sqrt_um, " um^-1/2 (", overlap.percent, " %)"));

  write_jsa(jsa, dir / "jsa.txt");
  write_schmidt_spectrum(schmidt.lambdas, dir / "schmidt_spectrum.tsv");
  manifest.outputs.push_back("report.txt");
  manifest.outputs.push_back("jsa.txt");
  manifest.outputs.push_back("schmidt_spectrum.tsv");
  write_manifest(manifest, dir);
  return kOk;
}

int cmd_sweep(const CommonOptions& opts, double bw_min_nm, double bw_max_nm,
              int points, JsaBuilder builder) {
  if (!(bw_min_nm > 0.0) || !(bw_max_nm > bw_min_nm) || points < 2) {
    std::cerr << "error: need 0 < bw-min < bw-max and at least 2 points\n";
    return kUsageError;
  }
  const auto in = load_inputs(opts);
  const auto dir = prepare_out_dir(opts);
  auto manifest = start_manifest("sweep", opts,
                                 {{"bw_min_nm", bw_min_nm},
                                  {"bw_max_nm", bw_max_nm},
                                  {"points", points},
                                  {"builder", builder == JsaBuilder::Full ? "full" : "linear"}});

  std::vector<double> bandwidths(points);
  for (int i = 0; i < points; ++i)
    bandwidths[i] = bw_min_nm + (bw_max_nm - bw_min_nm) * i / (points - 1);

  GridSpec grid;
  grid.n = opts.grid_n;
  const auto rows = sweep_pump_bandwidth(in.stack, in.process, bandwidths, builder, grid,
                                         resolved_threads(opts));

  write_sweep_table(rows, dir / "sweep.tsv");
  std::cout << "pump_fwhm_nm\tK\tE_bits\trho\n";
  std::cout.precision(9);
  for (const auto& r : rows)
    std::cout << r.pump_fwhm_nm << '\t' << r.schmidt_number << '\t' << r.entropy_bits
              << '\t' << r.rho << '\n';

  manifest.outputs.push_back("sweep.tsv");
  write_manifest(manifest, dir);
  return kOk;
}

int cmd_optimize(const CommonOptions& opts, const std::string& config_path, int top_k) {
  auto material = std::make_shared<MaterialModel>(load_material(opts.material_path));
  for (const auto& w : material->warnings) std::cerr << "warning: " << w << "\n";
  auto [config, bounds] = load_ga_config(config_path);
  if (opts.seed != 12345) config.seed = opts.seed; // CLI override

  const auto dir = prepare_out_dir(opts);
  RunManifest manifest;
  manifest.command = "optimize";
  manifest.version = kVersion;
  manifest.inputs.push_back({opts.material_path, file_hash_hex(opts.material_path)});
  manifest.inputs.push_back({config_path, file_hash_hex(config_path)});
  nlohmann::json cfg;
  cfg["seed"] = config.seed;
  cfg["population"] = config.population;
  cfg["generations"] = config.generations;
  cfg["target"] = config.target == GvmTarget::EqualSpectra ? "equal-spectra" : "unequal-spectra";
  manifest.config_json = cfg.dump();

  const FitnessFn fitness = [&](const Genes& genes) {
    return evaluate_fitness(genes, material, config);
  };
  const auto result = run_ga(config, bounds, fitness, resolved_threads(opts));

  write_ga_log(result.log, dir / "ga_log.tsv");
  manifest.outputs.push_back("ga_log.tsv");

  std::ofstream winners(dir / "winners.tsv");
  winners.precision(12);
  winners << "rank\tfitness\tfeasible";
  for (const char* name : kGeneNames) winners << '\t' << name;
  winners << "\tqpm_period_um\tn_g_pump\tn_g_signal\tn_g_idler\tgvm_residual\tgamma_hat\tK_linear\tK_full\n";

  const int n_report = std::min<int>(top_k, static_cast<int>(result.ranked.size()));
  std::cout << "rank\tfitness\tK_linear\tK_full\tqpm_um\n";
  std::cout.precision(9);
  for (int r = 0; r < n_report; ++r) {
    const auto& c = result.ranked[r];

    LayerStack stack;
    stack.t_c_nm = c.genes[0];
    stack.t_1_nm = c.genes[1];
    stack.t_2_nm = c.genes[2];
    stack.x_c = c.genes[3];
    stack.x_1 = c.genes[4];
    stack.x_2 = c.genes[5];
    stack.n_bilayers = config.n_bilayers;
    stack.length_mm = config.length_mm;
    stack.material = material;

    // re-score the winner with the full-dispersion builder
    double k_full = std::numeric_limits<double>::quiet_NaN();
    if (c.feasible) {
      try {
        const ProcessSpec process = ProcessSpec::degenerate(config.lambda_pair_nm, config.length_mm);
        const auto modes = solve_process_modes(stack, process, /*with_group_index=*/true);
        double delta_omega;
        try {
          delta_omega = optimal_pump_bandwidth(modes.n_g_pump, modes.n_g_signal,
                                               modes.n_g_idler, config.length_mm);
        } catch (const NumericalError&) {
          const double dN = std::max(std::abs(modes.n_g_pump - modes.n_g_idler),
                                     std::abs(modes.n_g_pump - modes.n_g_signal)) /
                            kSpeedOfLight;
          delta_omega = 20.0 / (dN * config.length_mm * 1e-3);
        }
        PumpSpec pump;
        pump.lambda0_nm = process.lambda_p0_nm();
        pump.delta_omega = delta_omega;
        GridSpec grid;
        grid.n = 256;
        const auto jsa = compute_jsa_full(stack, process, pump, grid);
        k_full = schmidt_decompose(jsa, 1).schmidt_number;
      } catch (const Error&) {
        // leave NaN
      }
    }

    winners << r << '\t' << c.fitness << '\t' << (c.feasible ? 1 : 0);
    for (double g : c.genes) winners << '\t' << g;
    winners << '\t' << c.derived.qpm_period_um << '\t' << c.derived.n_g_pump << '\t'
            << c.derived.n_g_signal << '\t' << c.derived.n_g_idler << '\t'
            << c.derived.gvm_residual << '\t' << c.derived.gamma_hat << '\t'
            << c.derived.schmidt_number << '\t' << k_full << '\n';
    std::cout << r << '\t' << c.fitness << '\t' << c.derived.schmidt_number << '\t'
              << k_full << '\t' << c.derived.qpm_period_um << '\n';

    if (c.feasible && std::isfinite(c.derived.qpm_period_um))
      stack.qpm_period_um = c.derived.qpm_period_um;
    char name[32];
    std::snprintf(name, sizeof(name), "winner_%02d.txt", r);
    save_structure(stack, dir / name);
    manifest.outputs.push_back(name);
  }
  manifest.outputs.push_back("winners.tsv");
  write_manifest(manifest, dir);
  return kOk;
}

} // namespace brw::cli
