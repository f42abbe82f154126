#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphoplast/environments.hpp"
#include "morphoplast/evaluation.hpp"
#include "morphoplast/genome.hpp"

namespace morphoplast {

// A: frozen weights, B: fixed plasticity, C: co-evolved eta and lambda.
enum class Condition { A, B, C };

std::string to_string(Condition c);
Condition condition_from_string(std::string_view s);

struct GAConfig {
  Condition condition = Condition::A;
  std::size_t population = 50;
  int generations = 200;
  double selection_fraction = 0.2;
  std::size_t elitism = 2;
  double mutation_rate = 0.3;
  EnvSpec spec = cartpole_spec();
  std::size_t width = 10;
  std::size_t height = 10;
  std::size_t iterations = 200;
  // Condition B parameters; defaults depend on the benchmark.
  PlasticityParams fixed_params{-0.01, 0.01};
  PlasticityRange plastic_range = cartpole_plasticity_range();
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> episode_seeds = default_seeds();
  std::size_t workers = 1;

  // Benchmark defaults: 10x10 grid, B = (-0.01, 0.01) for CartPole;
  // 20x20, B = (-0.001, 0.05) and the narrower eta range for Acrobot.
  static GAConfig for_env(const EnvSpec& spec, Condition c, std::uint64_t seed);
  // Throws std::invalid_argument on inconsistent values.
  void validate() const;
  std::size_t parent_pool() const;  // top selection_fraction of the population, at least 2
};

struct FitnessResult {
  double fitness = 0.0;
  double mean_reward = 0.0;
  std::size_t neurons = 0;
  std::size_t connections = 0;
  bool functional = false;
};

// mean_reward / 500 on CartPole, (500 + mean_reward) / 500 on Acrobot,
// clamped to [0, 1]; 0 for non-functional networks.
double normalised_fitness(double mean_reward, EnvKind kind);

FitnessResult fitness_of(const Genome& g, const GAConfig& cfg);

// Order used for selection: fitness descending, then lower genome hash.
std::vector<std::size_t> rank_population(const std::vector<Genome>& pop, const std::vector<double>& fitness);

// Elites copied unchanged, the rest bred from two distinct parents drawn
// uniformly from the parent pool. All draws come from
// derive_key(cfg.seed, generation).
std::vector<Genome> ga_generation_step(const std::vector<Genome>& pop, const std::vector<double>& fitness,
                                       const GAConfig& cfg, int generation);

std::vector<Genome> initial_population(const GAConfig& cfg);

struct GenerationLog {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  Genome best_genome;
  std::optional<double> best_eta;  // condition C
  std::optional<double> best_lambda;
  std::optional<double> mean_eta;
  std::size_t best_neurons = 0;
  std::size_t best_connections = 0;
  std::size_t evaluations = 0;  // cumulative, elites counted
};

struct GARunLog {
  GAConfig config;
  std::vector<GenerationLog> generations;  // generation 0 is the initial population
  std::size_t evaluations = 0;             // counted (50 + 200 * 50 by default)
  std::size_t developments = 0;            // actually computed (cache misses)

  // First generation whose best fitness reaches `threshold`.
  std::optional<int> generation_reaching(double threshold) const;
};

// Runs the whole GA. When `stop_when_best_reaches` is set, stops after the
// first generation whose best fitness reaches it (used for convergence
// checks only; the full count rule then does not apply).
GARunLog run_ga(const GAConfig& cfg, std::optional<double> stop_when_best_reaches = std::nullopt);

std::string generation_to_json_line(const GenerationLog& g);
std::string ga_summary_csv_header();
std::string ga_summary_csv_row(const GARunLog& log);

}  // namespace morphoplast
