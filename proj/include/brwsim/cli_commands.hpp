#pragma once

#include <cstdint>
#include <string>

#include "brwsim/schmidt.hpp"

namespace brw {

inline constexpr const char* kVersion = "0.1.0";

namespace cli {

/// Exit-code contract: 0 success, 2 usage error, 3 input-data error,
/// 4 numerical failure.
enum ExitCode : int {
  kOk = 0,
  kUsageError = 2,
  kInputError = 3,
  kNumericalError = 4,
};

struct CommonOptions {
  std::string structure_path;
  std::string material_path = "data/algan_sellmeier.txt";
  std::string out_dir = "out";
  int grid_n = 512;
  int threads = 0; ///< 0 = all available cores, 1 = fully serial
  std::uint64_t seed = 12345;
  double lambda_pair_nm = 1550.0;
  bool use_file_qpm = false; ///< take Lambda from the structure file
};

int resolved_threads(const CommonOptions& opts);

int cmd_modes(const CommonOptions& opts, double lambda_nm, Polarization pol,
              double lo, double hi);
int cmd_qpm(const CommonOptions& opts);
int cmd_overlap(const CommonOptions& opts);
int cmd_analyze(const CommonOptions& opts, double pump_fwhm_nm, JsaBuilder builder);
int cmd_sweep(const CommonOptions& opts, double bw_min_nm, double bw_max_nm,
              int points, JsaBuilder builder);
int cmd_optimize(const CommonOptions& opts, const std::string& config_path, int top_k);

} // namespace cli
} // namespace brw
