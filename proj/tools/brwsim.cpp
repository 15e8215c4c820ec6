// Command-line front end: mode solving, QPM, JSA analysis, pump-bandwidth
// sweeps and genetic structure search for AlGaN Bragg reflection
// waveguide photon-pair sources.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "brwsim/cli_commands.hpp"
#include "brwsim/errors.hpp"

using namespace brw;

namespace {

int dispatch(const std::function<int()>& run) {
  try {
    return run();
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return cli::kInputError;
  } catch (const RangeError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return cli::kInputError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return cli::kNumericalError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kNumericalError;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"brwsim - SPDC photon-pair simulator for Bragg reflection waveguides"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  cli::CommonOptions common;
  auto add_common = [&common](CLI::App* cmd, bool needs_structure = true) {
    auto* s = cmd->add_option("--structure", common.structure_path, "structure file");
    if (needs_structure) s->required();
    cmd->add_option("--material", common.material_path, "material coefficient file");
    cmd->add_option("--out", common.out_dir, "output directory");
    cmd->add_option("--grid", common.grid_n, "JSA grid points per axis");
    cmd->add_option("--threads", common.threads, "worker threads (0 = all cores, 1 = serial)");
    cmd->add_option("--seed", common.seed, "random seed");
    cmd->add_option("--lambda-pair", common.lambda_pair_nm, "photon-pair central wavelength, nm");
    cmd->add_flag("--use-file-qpm", common.use_file_qpm,
                  "use the Lambda value from the structure file instead of solving it");
  };

  // modes
  auto* modes = app.add_subcommand("modes", "solve guided and Bragg modes of a structure");
  double lambda_nm = 1550.0, lo = 1.05, hi = 3.0;
  std::string pol_str = "TE";
  add_common(modes);
  modes->add_option("--lambda", lambda_nm, "vacuum wavelength, nm");
  modes->add_option("--pol", pol_str, "polarization: TE or TM")
      ->check(CLI::IsMember({"TE", "TM"}));
  modes->add_option("--lo", lo, "n_eff search lower bound");
  modes->add_option("--hi", hi, "n_eff search upper bound");

  // qpm
  auto* qpm = app.add_subcommand("qpm", "QPM period and group velocities of the process modes");
  add_common(qpm);

  // overlap
  auto* overlap = app.add_subcommand("overlap", "transverse overlap of the three process modes");
  add_common(overlap);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "JSA, Schmidt decomposition and entanglement report");
  double pump_bw_nm = 0.0;
  std::string builder_str = "full";
  add_common(analyze);
  analyze->add_option("--pump-bw", pump_bw_nm, "pump bandwidth FWHM, nm")->required();
  analyze->add_option("--builder", builder_str, "JSA builder: full or linear")
      ->check(CLI::IsMember({"full", "linear"}));

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Schmidt number vs pump bandwidth");
  double bw_min = 0.2, bw_max = 6.0;
  int points = 25;
  std::string sweep_builder_str = "full";
  add_common(sweep);
  sweep->add_option("--bw-min", bw_min, "smallest pump FWHM, nm");
  sweep->add_option("--bw-max", bw_max, "largest pump FWHM, nm");
  sweep->add_option("--points", points, "number of bandwidths");
  sweep->add_option("--builder", sweep_builder_str, "JSA builder: full or linear")
      ->check(CLI::IsMember({"full", "linear"}));

  // optimize
  auto* optimize = app.add_subcommand("optimize", "genetic search over structure parameters");
  std::string ga_config;
  int top_k = 5;
  add_common(optimize, /*needs_structure=*/false);
  optimize->add_option("--config", ga_config, "GA configuration file")->required();
  optimize->add_option("--top", top_k, "number of winners to report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUsageError;
  }

  auto builder_of = [](const std::string& s) {
    return s == "linear" ? JsaBuilder::Linear : JsaBuilder::Full;
  };

  if (modes->parsed()) {
    const Polarization pol = (pol_str == "TM") ? Polarization::TM : Polarization::TE;
    return dispatch([&] { return cli::cmd_modes(common, lambda_nm, pol, lo, hi); });
  }
  if (qpm->parsed()) return dispatch([&] { return cli::cmd_qpm(common); });
  if (overlap->parsed()) return dispatch([&] { return cli::cmd_overlap(common); });
  if (analyze->parsed())
    return dispatch([&] { return cli::cmd_analyze(common, pump_bw_nm, builder_of(builder_str)); });
  if (sweep->parsed())
    return dispatch([&] {
      return cli::cmd_sweep(common, bw_min, bw_max, points, builder_of(sweep_builder_str));
    });
  if (optimize->parsed())
    return dispatch([&] { return cli::cmd_optimize(common, ga_config, top_k); });
  return cli::kUsageError;
}
