#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "brwsim/material.hpp"

namespace brw {

/// Group-velocity matching objective: indistinguishable photons need
/// N_p = (N_s + N_i)/2, distinguishable (pump-matched) ones N_p = N_s.
enum class GvmTarget { EqualSpectra, UnequalSpectra };

/// Gene order used throughout: t_c, t_1, t_2 (nm), x_c, x_1, x_2.
using Genes = std::array<double, 6>;

inline constexpr std::array<const char*, 6> kGeneNames = {
    "t_c", "t_1", "t_2", "x_c", "x_1", "x_2"};

struct GeneBounds {
  std::array<std::pair<double, double>, 6> range;
};

struct DerivedMetrics {
  double qpm_period_um = 0.0;
  double n_g_pump = 0.0, n_g_signal = 0.0, n_g_idler = 0.0;
  double gvm_residual = 0.0;
  double gamma_hat = 0.0;
  double schmidt_number = 0.0;
};

struct Candidate {
  Genes genes{};
  double fitness = 0.0;
  bool feasible = false;
  DerivedMetrics derived;
};

struct GAConfig {
  int population = 64;
  int generations = 200;
  double crossover_rate = 0.9;
  double mutation_rate = 0.3;
  double mutation_sigma_frac = 0.02; ///< per-gene sigma as fraction of range
  int elitism = 2;
  int tournament = 3;
  double w_gvm = 1.0;
  double w_overlap = 0.25;
  double w_k = 1.0;
  GvmTarget target = GvmTarget::EqualSpectra;
  std::uint64_t seed = 12345;
  double lambda_pair_nm = 1550.0;
  double length_mm = 4.0;
  int n_bilayers = 12;

  void validate() const;
};

struct EvalResult {
  double fitness = 0.0;
  bool feasible = false;
  DerivedMetrics derived;
};

using FitnessFn = std::function<EvalResult(const Genes&)>;

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  Genes best_genes{};
};

struct GAResult {
  std::vector<Candidate> ranked; ///< final population, best first
  std::vector<GenerationStats> log;
};

/// Fitness charged to every infeasible candidate, on top of a violation
/// measure; feasible objective values never come near it.
inline constexpr double kInfeasiblePenalty = 1e12;

/// Scores one structure: solves the three process modes, derives the QPM
/// period, group-velocity-matching residual, mode overlap and the Schmidt
/// number of the linear-dispersion JSA at the optimal pump bandwidth.
/// Structures missing a required mode or with a QPM period outside
/// [2, 50] um are flagged infeasible and given a penalty fitness.
EvalResult evaluate_fitness(const Genes& genes,
                            const std::shared_ptr<const MaterialModel>& material,
                            const GAConfig& config);

/// Real-coded genetic algorithm: tournament selection, blend crossover,
/// Gaussian per-gene mutation (clamped to bounds), elitism. Fully
/// deterministic for a fixed seed; fitness evaluations within one
/// generation run in parallel with per-candidate random streams, so the
/// thread count never changes the result. Throws Error when five reseeds
/// in a row fail to produce any feasible candidate.
GAResult run_ga(const GAConfig& config, const GeneBounds& bounds,
                const FitnessFn& fitness, int threads = 1);

/// Reads a GA configuration file (key = value lines plus one
/// 'bounds <gene> = lo hi' line per gene).
std::pair<GAConfig, GeneBounds> load_ga_config(const std::filesystem::path& path);

} // namespace brw
