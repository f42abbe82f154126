#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "morphoplast/evolution.hpp"

using namespace morphoplast;

TEST_CASE("fitness normalisation") {
  CHECK(normalised_fitness(500, EnvKind::cartpole) == 1.0);
  CHECK(normalised_fitness(250, EnvKind::cartpole) == 0.5);
  CHECK(normalised_fitness(-500, EnvKind::acrobot) == 0.0);
  CHECK(normalised_fitness(-100, EnvKind::acrobot) == doctest::Approx(0.8));
  CHECK(normalised_fitness(-1, EnvKind::acrobot) == doctest::Approx(0.998));
}

TEST_CASE("config defaults per benchmark") {
  const auto c = GAConfig::for_env(cartpole_spec(), Condition::B, 1);
  CHECK(c.width == 10);
  CHECK(c.fixed_params == PlasticityParams{-0.01, 0.01});
  CHECK(c.parent_pool() == 10);
  const auto a = GAConfig::for_env(acrobot_spec(), Condition::B, 1);
  CHECK(a.width == 20);
  CHECK(a.fixed_params == PlasticityParams{-0.001, 0.05});
  CHECK(a.plastic_range == acrobot_plasticity_range());
  GAConfig bad = c;
  bad.elitism = 50;
  CHECK_THROWS(bad.validate());
  bad = c;
  bad.mutation_rate = 2;
  CHECK_THROWS(bad.validate());
  CHECK(condition_from_string("c") == Condition::C);
  CHECK_THROWS(condition_from_string("D"));
}

TEST_CASE("ranking breaks ties by hash") {
  std::vector<Genome> pop = {sample_random(1), sample_random(2), sample_random(3)};
  const auto order = rank_population(pop, {0.5, 0.9, 0.5});
  CHECK(order[0] == 1);
  CHECK((pop[order[1]].hash() < pop[order[2]].hash()));
}

TEST_CASE("generation step keeps elites and draws from the parent pool") {
  auto cfg = GAConfig::for_env(cartpole_spec(), Condition::C, 9);
  cfg.population = 10;
  cfg.selection_fraction = 0.2;
  cfg.elitism = 2;
  const auto pop = initial_population(cfg);
  REQUIRE(pop.size() == 10);
  for (const auto& g : pop) CHECK(g.size() == 56);
  std::vector<double> f(10);
  for (int i = 0; i < 10; ++i) f[i] = 0.1 * i;
  const auto next = ga_generation_step(pop, f, cfg, 1);
  CHECK(next.size() == 10);
  CHECK(next[0] == pop[9]);
  CHECK(next[1] == pop[8]);
  CHECK(next == ga_generation_step(pop, f, cfg, 1));
  CHECK_FALSE(next == ga_generation_step(pop, f, cfg, 2));
  for (const auto& g : next) CHECK(g.valid());
  // children only carry alleles of the two best with mutation off
  cfg.mutation_rate = 0.0;
  const auto kids = ga_generation_step(pop, f, cfg, 3);
  for (std::size_t k = 2; k < kids.size(); ++k) {
    for (std::size_t i = 0; i < 56; ++i) {
      const bool from_top = kids[k].flat_at(i) == pop[9].flat_at(i) || kids[k].flat_at(i) == pop[8].flat_at(i);
      CHECK(from_top);
    }
  }
}

TEST_CASE("short run is deterministic, monotone and counted") {
  auto cfg = GAConfig::for_env(cartpole_spec(), Condition::C, 4);
  cfg.population = 12;
  cfg.generations = 4;
  cfg.episode_seeds = {42, 43, 44};
  cfg.workers = 3;
  const auto a = run_ga(cfg);
  cfg.workers = 1;
  const auto b = run_ga(cfg);
  REQUIRE(a.generations.size() == 5);
  CHECK(a.evaluations == 12 + 4 * 12);
  CHECK(a.developments <= a.evaluations);
  for (std::size_t g = 0; g < a.generations.size(); ++g) {
    CHECK(a.generations[g].best_fitness == b.generations[g].best_fitness);
    CHECK(a.generations[g].best_genome == b.generations[g].best_genome);
    if (g) CHECK(a.generations[g].best_fitness >= a.generations[g - 1].best_fitness);
    REQUIRE(a.generations[g].best_eta.has_value());
    CHECK(std::fabs(*a.generations[g].best_eta) <= 0.5);
  }
  const auto line = generation_to_json_line(a.generations.back());
  CHECK(line.find("\"best_fitness\"") != std::string::npos);
  const auto row = ga_summary_csv_row(a);
  const auto header = ga_summary_csv_header();
  CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
}

TEST_CASE("stop threshold truncates the run") {
  auto cfg = GAConfig::for_env(cartpole_spec(), Condition::A, 1);
  cfg.population = 6;
  cfg.generations = 5;
  cfg.episode_seeds = {42};
  const auto log = run_ga(cfg, 0.0);
  CHECK(log.generations.size() == 1);
  CHECK(log.generation_reaching(0.0) == 0);
}
