#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "brwsim/modesolver.hpp"
#include "brwsim/optimizer.hpp"
#include "brwsim/schmidt.hpp"
#include "brwsim/spdc.hpp"

namespace brw {

/// JSA matrix file: header, the two detuning axis vectors, then the real
/// and imaginary planes of the amplitude, row-major (one signal row per
/// line). All values printed with full double precision.
void write_jsa(const JointSpectralAmplitude& jsa, const std::filesystem::path& path);
JointSpectralAmplitude read_jsa(const std::filesystem::path& path);

/// Tab-separated sweep table with unit-suffixed headers.
void write_sweep_table(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// (n, lambda_n) table of a Schmidt spectrum.
void write_schmidt_spectrum(const Eigen::VectorXd& lambdas, const std::filesystem::path& path,
                            int max_rows = 64);

/// Sampled transverse field of one mode.
void write_mode_profile(const GuidedMode& mode, const std::filesystem::path& path);

/// GA generation log as a delimited table.
void write_ga_log(const std::vector<GenerationStats>& log, const std::filesystem::path& path);

/// FNV-1a 64-bit content hash, hex encoded (manifest input fingerprints).
std::string file_hash_hex(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::string version;
  std::vector<std::pair<std::string, std::string>> inputs; ///< path, hash
  std::string config_json; ///< resolved option snapshot
  std::vector<std::string> outputs;
};

/// Writes manifest.json into the output directory (exactly one per run).
void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);

} // namespace brw
