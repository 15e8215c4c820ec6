#include "brwsim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "brwsim/constants.hpp"
#include "brwsim/errors.hpp"
#include "brwsim/parallel.hpp"
#include "brwsim/schmidt.hpp"
#include "brwsim/spdc.hpp"

namespace brw {

namespace {

// splitmix64: decorrelates the per-candidate seeds derived from the
// master seed so parallel scheduling cannot change any draw
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream_for(std::uint64_t master, std::uint64_t generation,
                           std::uint64_t index, std::uint64_t salt) {
  return std::mt19937_64(splitmix64(master ^ splitmix64(generation * 0x10001ULL + index) ^
                                    splitmix64(salt)));
}

double clamp_gene(double v, const std::pair<double, double>& range) {
  return std::clamp(v, range.first, range.second);
}

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.fitness != b.fitness) return a.fitness < b.fitness;
  return a.genes < b.genes; // deterministic tie-break
}

} // namespace

void GAConfig::validate() const {
  if (population < 4) throw Error("GA population must be >= 4");
  if (generations < 1) throw Error("GA needs at least one generation");
  for (double rate : {crossover_rate, mutation_rate})
    if (!(rate >= 0.0 && rate <= 1.0)) throw Error("GA rates must lie in [0, 1]");
  if (elitism < 0 || elitism >= population) throw Error("elitism must be in [0, population)");
  if (tournament < 1) throw Error("tournament size must be >= 1");
  if (w_gvm < 0.0 || w_overlap < 0.0 || w_k < 0.0) throw Error("objective weights must be >= 0");
  if (w_gvm + w_overlap + w_k <= 0.0) throw Error("at least one objective weight must be > 0");
}

EvalResult evaluate_fitness(const Genes& genes,
                            const std::shared_ptr<const MaterialModel>& material,
                            const GAConfig& config) {
  EvalResult out;
  out.feasible = false;

  LayerStack stack;
  stack.t_c_nm = genes[0];
  stack.t_1_nm = genes[1];
  stack.t_2_nm = genes[2];
  stack.x_c = genes[3];
  stack.x_1 = genes[4];
  stack.x_2 = genes[5];
  stack.n_bilayers = config.n_bilayers;
  stack.length_mm = config.length_mm;
  stack.material = material;

  const ProcessSpec process = ProcessSpec::degenerate(config.lambda_pair_nm, config.length_mm);

  ProcessModes modes;
  try {
    stack.validate();
    modes = solve_process_modes(stack, process, /*with_group_index=*/true);
  } catch (const Error&) {
    out.fitness = kInfeasiblePenalty + 1e6; // required mode missing
    return out;
  }

  out.derived.n_g_pump = modes.n_g_pump;
  out.derived.n_g_signal = modes.n_g_signal;
  out.derived.n_g_idler = modes.n_g_idler;

  const double beta_p = modes.pump.n_eff * process.omega_p0();
  const double beta_s = modes.signal.n_eff * process.omega_s0;
  const double beta_i = modes.idler.n_eff * process.omega_i0;
  const double delta_k = (beta_p - beta_s - beta_i) / kSpeedOfLight; // rad/m
  const double period_um = (std::abs(delta_k) > 1e-6) ? kTwoPi / std::abs(delta_k) * 1e6
                                                      : std::numeric_limits<double>::infinity();
  out.derived.qpm_period_um = period_um;
  if (!(period_um >= 2.0 && period_um <= 50.0)) {
    out.fitness = kInfeasiblePenalty +
                  (std::isfinite(period_um) ? std::abs(std::log(period_um / 10.0)) : 1e3);
    return out;
  }

  const double residual = (config.target == GvmTarget::EqualSpectra)
                              ? modes.n_g_pump - 0.5 * (modes.n_g_signal + modes.n_g_idler)
                              : modes.n_g_pump - modes.n_g_signal;
  out.derived.gvm_residual = residual;

  const auto overlap = mode_overlap(modes.pump.profile, modes.signal.profile,
                                    modes.idler.profile, modes.pump.grid.dx_um);
  out.derived.gamma_hat = std::abs(overlap.gamma_hat);

  // Schmidt number of the first-order JSA at the optimal pump bandwidth;
  // when no symmetric separability point exists, fall back to the
  // wide-pump limit delta_omega |N_p - N_i| L = 20.
  double k_value;
  try {
    double delta_omega;
    try {
      delta_omega = optimal_pump_bandwidth(modes.n_g_pump, modes.n_g_signal,
                                           modes.n_g_idler, config.length_mm);
    } catch (const NumericalError&) {
      const double dN = std::max(std::abs(modes.n_g_pump - modes.n_g_idler),
                                 std::abs(modes.n_g_pump - modes.n_g_signal)) /
                        kSpeedOfLight;
      if (!(dN > 0.0)) throw;
      delta_omega = 20.0 / (dN * config.length_mm * 1e-3);
    }
    PumpSpec pump;
    pump.lambda0_nm = process.lambda_p0_nm();
    pump.delta_omega = delta_omega;
    GridSpec grid;
    grid.n = 96;
    const auto jsa = compute_jsa_linear(modes.n_g_pump, modes.n_g_signal, modes.n_g_idler,
                                        config.length_mm, pump, process.omega_s0,
                                        process.omega_i0, grid);
    k_value = schmidt_decompose(jsa, 1).schmidt_number;
  } catch (const Error&) {
    k_value = 1e3;
  }
  out.derived.schmidt_number = k_value;

  double fitness = config.w_gvm * residual * residual +
                   config.w_overlap * (1.0 - out.derived.gamma_hat) +
                   config.w_k * (k_value - 1.0);
  if (!std::isfinite(fitness)) {
    out.fitness = kInfeasiblePenalty + 1e6;
    return out;
  }
  out.feasible = true;
  out.fitness = fitness;
  return out;
}

GAResult run_ga(const GAConfig& config, const GeneBounds& bounds,
                const FitnessFn& fitness, int threads) {
  config.validate();
  for (const auto& r : bounds.range)
    if (!(r.first <= r.second)) throw Error("GA bounds: lower bound exceeds upper bound");

  const int pop_size = config.population;

  auto random_genes = [&](std::mt19937_64& rng) {
    Genes g;
    for (int j = 0; j < 6; ++j) {
      std::uniform_real_distribution<double> dist(bounds.range[j].first, bounds.range[j].second);
      g[j] = dist(rng);
    }
    return g;
  };

  auto evaluate_all = [&](std::vector<Candidate>& pop, int first) {
    parallel_for(static_cast<int>(pop.size()) - first, threads, [&](int i) {
      Candidate& c = pop[first + i];
      const EvalResult r = fitness(c.genes);
      c.fitness = std::isfinite(r.fitness) ? r.fitness : kInfeasiblePenalty + 1e6;
      c.feasible = r.feasible;
      c.derived = r.derived;
    });
  };

  // initial population, reseeded up to five times if nothing is feasible
  std::vector<Candidate> population(pop_size);
  bool any_feasible = false;
  for (int attempt = 0; attempt < 5 && !any_feasible; ++attempt) {
    for (int i = 0; i < pop_size; ++i) {
      auto rng = stream_for(config.seed, 0, static_cast<std::uint64_t>(i),
                            0xA11CE + static_cast<std::uint64_t>(attempt));
      population[i].genes = random_genes(rng);
    }
    evaluate_all(population, 0);
    for (const auto& c : population) any_feasible |= c.feasible;
  }
  if (!any_feasible)
    throw Error("GA initialization failed: no feasible candidate after 5 reseeds");

  GAResult result;
  for (int gen = 1; gen <= config.generations; ++gen) {
    std::sort(population.begin(), population.end(), candidate_less);

    GenerationStats stats;
    stats.generation = gen - 1;
    stats.best_fitness = population.front().fitness;
    stats.best_genes = population.front().genes;
    double mean = 0.0;
    for (const auto& c : population) mean += c.fitness;
    stats.mean_fitness = mean / pop_size;
    result.log.push_back(stats);

    std::vector<Candidate> next(pop_size);
    for (int e = 0; e < config.elitism; ++e) next[e] = population[e]; // fitness kept

    for (int i = config.elitism; i < pop_size; ++i) {
      auto rng = stream_for(config.seed, static_cast<std::uint64_t>(gen),
                            static_cast<std::uint64_t>(i), 0xB4EED);
      auto pick_parent = [&]() -> const Candidate& {
        std::uniform_int_distribution<int> dist(0, pop_size - 1);
        int best = dist(rng);
        for (int t = 1; t < config.tournament; ++t) {
          const int idx = dist(rng);
          if (candidate_less(population[idx], population[best])) best = idx;
        }
        return population[best];
      };

      const Candidate& p1 = pick_parent();
      const Candidate& p2 = pick_parent();
      std::uniform_real_distribution<double> unit(0.0, 1.0);

      Genes child = p1.genes;
      if (unit(rng) < config.crossover_rate) {
        // blend crossover (BLX-0.5)
        for (int j = 0; j < 6; ++j) {
          const double lo = std::min(p1.genes[j], p2.genes[j]);
          const double hi = std::max(p1.genes[j], p2.genes[j]);
          const double d = hi - lo;
          std::uniform_real_distribution<double> blend(lo - 0.5 * d, hi + 0.5 * d);
          child[j] = clamp_gene(blend(rng), bounds.range[j]);
        }
      }
      for (int j = 0; j < 6; ++j) {
        if (unit(rng) < config.mutation_rate) {
          const double sigma =
              config.mutation_sigma_frac * (bounds.range[j].second - bounds.range[j].first);
          std::normal_distribution<double> gauss(0.0, sigma);
          child[j] = clamp_gene(child[j] + gauss(rng), bounds.range[j]);
        }
      }
      next[i].genes = child;
    }

    evaluate_all(next, config.elitism);
    population = std::move(next);
  }

  std::sort(population.begin(), population.end(), candidate_less);
  GenerationStats final_stats;
  final_stats.generation = config.generations;
  final_stats.best_fitness = population.front().fitness;
  final_stats.best_genes = population.front().genes;
  double mean = 0.0;
  for (const auto& c : population) mean += c.fitness;
  final_stats.mean_fitness = mean / pop_size;
  result.log.push_back(final_stats);

  result.ranked = std::move(population);
  return result;
}

std::pair<GAConfig, GeneBounds> load_ga_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open GA config '" + path.string() + "'");

  GAConfig config;
  GeneBounds bounds;
  std::array<bool, 6> have_bound{};

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::string key;
    if (!(is >> key)) continue;
    auto bad = [&](const std::string& msg) {
      throw ParseError("GA config '" + path.string() + "' line " + std::to_string(line_no) +
                       ": " + msg);
    };

    if (key == "bounds") {
      std::string gene, eq;
      double lo, hi;
      if (!(is >> gene >> eq >> lo >> hi) || eq != "=") bad("expected 'bounds <gene> = lo hi'");
      int idx = -1;
      for (int j = 0; j < 6; ++j)
        if (gene == kGeneNames[j]) idx = j;
      if (idx < 0) bad("unknown gene '" + gene + "'");
      bounds.range[idx] = {lo, hi};
      have_bound[idx] = true;
      continue;
    }

    std::string eq, value;
    if (!(is >> eq >> value) || eq != "=") bad("expected '<key> = <value>'");
    try {
      if (key == "population") config.population = std::stoi(value);
      else if (key == "generations") config.generations = std::stoi(value);
      else if (key == "crossover_rate") config.crossover_rate = std::stod(value);
      else if (key == "mutation_rate") config.mutation_rate = std::stod(value);
      else if (key == "mutation_sigma_frac") config.mutation_sigma_frac = std::stod(value);
      else if (key == "elitism") config.elitism = std::stoi(value);
      else if (key == "tournament") config.tournament = std::stoi(value);
      else if (key == "w_gvm") config.w_gvm = std::stod(value);
      else if (key == "w_overlap") config.w_overlap = std::stod(value);
      else if (key == "w_K") config.w_k = std::stod(value);
      else if (key == "seed") config.seed = std::stoull(value);
      else if (key == "lambda_pair_nm") config.lambda_pair_nm = std::stod(value);
      else if (key == "L") config.length_mm = std::stod(value);
      else if (key == "n_bilayers") config.n_bilayers = std::stoi(value);
      else if (key == "target") {
        if (value == "equal-spectra") config.target = GvmTarget::EqualSpectra;
        else if (value == "unequal-spectra") config.target = GvmTarget::UnequalSpectra;
        else bad("target must be equal-spectra or unequal-spectra");
      } else {
        bad("unknown key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      bad("cannot parse value '" + value + "'");
    }
  }

  for (int j = 0; j < 6; ++j)
    if (!have_bound[j])
      throw ParseError("GA config '" + path.string() + "': missing bounds for gene '" +
                       std::string(kGeneNames[j]) + "'");
  config.validate();
  return {config, bounds};
}

} // namespace brw
