#include "morphoplast/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "morphoplast/morphogenesis.hpp"
#include "morphoplast/rng.hpp"

namespace morphoplast {

namespace {

constexpr std::uint64_t kInitTag = 0x696E6974ULL;  // "init"

std::string exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

std::string to_string(Condition c) {
  switch (c) {
    case Condition::A: return "A";
    case Condition::B: return "B";
    case Condition::C: return "C";
  }
  return "?";
}

Condition condition_from_string(std::string_view s) {
  if (s == "A" || s == "a") return Condition::A;
  if (s == "B" || s == "b") return Condition::B;
  if (s == "C" || s == "c") return Condition::C;
  throw std::invalid_argument("unknown GA condition '" + std::string(s) + "'");
}

GAConfig GAConfig::for_env(const EnvSpec& spec, Condition c, std::uint64_t seed) {
  GAConfig cfg;
  cfg.condition = c;
  cfg.spec = spec;
  cfg.seed = seed;
  if (spec.kind == EnvKind::acrobot) {
    cfg.width = cfg.height = 20;
    cfg.fixed_params = {-0.001, 0.05};
    cfg.plastic_range = acrobot_plasticity_range();
  }
  return cfg;
}

std::size_t GAConfig::parent_pool() const {
  const auto k = static_cast<std::size_t>(std::llround(selection_fraction * static_cast<double>(population)));
  return std::clamp<std::size_t>(k, std::min<std::size_t>(2, population), population);
}

void GAConfig::validate() const {
  if (population < 2) throw std::invalid_argument("GA population must be at least 2");
  if (elitism >= population) throw std::invalid_argument("elitism must be smaller than the population");
  if (generations < 0) throw std::invalid_argument("generations must be non-negative");
  if (!(selection_fraction > 0.0 && selection_fraction <= 1.0)) {
    throw std::invalid_argument("selection fraction must lie in (0, 1]");
  }
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw std::invalid_argument("mutation rate must lie in [0, 1]");
  if (width < 2 || height < 2 || iterations < 1) throw std::invalid_argument("bad development grid");
  if (episode_seeds.empty()) throw std::invalid_argument("GA needs episode seeds");
}

double normalised_fitness(double mean_reward, EnvKind kind) {
  const double f = kind == EnvKind::cartpole ? mean_reward / 500.0 : (500.0 + mean_reward) / 500.0;
  return std::clamp(f, 0.0, 1.0);
}

FitnessResult fitness_of(const Genome& g, const GAConfig& cfg) {
  FitnessResult r;
  const DevelopedNetwork net = develop(g, cfg.width, cfg.height, cfg.iterations);
  r.neurons = net.neurons.size();
  r.connections = net.connections.size();
  r.functional = net.functional_for(observation_size(cfg.spec.kind), action_count(cfg.spec.kind));
  if (!r.functional) return r;
  EvalRecord rec;
  switch (cfg.condition) {
    case Condition::A: rec = evaluate_baseline(net, cfg.spec, cfg.episode_seeds); break;
    case Condition::B:
      rec = evaluate_network(net, cfg.spec, cfg.fixed_params, Mode::plastic, cfg.episode_seeds);
      break;
    case Condition::C: {
      if (!g.has_plasticity()) throw std::invalid_argument("condition C genome lacks plasticity genes");
      const PlasticityParams p{g.plasticity()->eta, g.plasticity()->lambda};
      rec = evaluate_network(net, cfg.spec, p, Mode::plastic, cfg.episode_seeds);
      break;
    }
  }
  r.mean_reward = rec.mean_reward;
  r.fitness = normalised_fitness(rec.mean_reward, cfg.spec.kind);
  return r;
}

std::vector<std::size_t> rank_population(const std::vector<Genome>& pop, const std::vector<double>& fitness) {
  if (pop.size() != fitness.size()) throw std::invalid_argument("rank_population: size mismatch");
  std::vector<std::size_t> idx(pop.size());
  std::vector<std::uint64_t> h(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    idx[i] = i;
    h[i] = pop[i].hash();
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (fitness[a] != fitness[b]) return fitness[a] > fitness[b];
    return h[a] < h[b];
  });
  return idx;
}

std::vector<Genome> ga_generation_step(const std::vector<Genome>& pop, const std::vector<double>& fitness,
                                       const GAConfig& cfg, int generation) {
  if (pop.size() != cfg.population) throw std::invalid_argument("population size does not match the config");
  const auto order = rank_population(pop, fitness);
  Rng rng(derive_key(cfg.seed, static_cast<std::uint64_t>(generation)));
  std::vector<Genome> next;
  next.reserve(cfg.population);
  for (std::size_t e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);
  const std::size_t k = cfg.parent_pool();
  while (next.size() < cfg.population) {
    const std::size_t a = rng.below(k);
    std::size_t b = rng.below(k);
    if (k > 1) {
      while (b == a) b = rng.below(k);
    }
    const Genome child = crossover(pop[order[a]], pop[order[b]], rng.next());
    next.push_back(mutate(child, cfg.mutation_rate, rng.next()));
  }
  return next;
}

std::vector<Genome> initial_population(const GAConfig& cfg) {
  std::vector<Genome> pop;
  const std::uint64_t base = derive_key(cfg.seed, kInitTag);
  for (std::size_t i = 0; i < cfg.population; ++i) {
    const std::uint64_t s = derive_key(base, i);
    pop.push_back(cfg.condition == Condition::C ? sample_random_plastic(s, cfg.plastic_range) : sample_random(s));
  }
  return pop;
}

std::optional<int> GARunLog::generation_reaching(double threshold) const {
  for (const auto& g : generations) {
    if (g.best_fitness >= threshold) return g.generation;
  }
  return std::nullopt;
}

GARunLog run_ga(const GAConfig& cfg, std::optional<double> stop_when_best_reaches) {
  cfg.validate();
  GARunLog log;
  log.config = cfg;
  std::unordered_map<std::uint64_t, FitnessResult> cache;

  auto evaluate = [&](const std::vector<Genome>& pop) {
    std::vector<FitnessResult> out(pop.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      auto it = cache.find(pop[i].hash());
      if (it != cache.end()) {
        out[i] = it->second;
      } else {
        todo.push_back(i);
      }
    }
    parallel_for(todo.size(), cfg.workers, [&](std::size_t j) { out[todo[j]] = fitness_of(pop[todo[j]], cfg); });
    for (std::size_t i : todo) {
      if (cache.emplace(pop[i].hash(), out[i]).second) ++log.developments;
    }
    log.evaluations += pop.size();
    return out;
  };

  auto record = [&](int gen, const std::vector<Genome>& pop, const std::vector<FitnessResult>& fr) {
    std::vector<double> f(fr.size());
    double sum = 0.0, eta_sum = 0.0;
    for (std::size_t i = 0; i < fr.size(); ++i) {
      f[i] = fr[i].fitness;
      sum += f[i];
      if (pop[i].has_plasticity()) eta_sum += pop[i].plasticity()->eta;
    }
    const std::size_t best = rank_population(pop, f).front();
    GenerationLog g;
    g.generation = gen;
    g.best_fitness = f[best];
    g.mean_fitness = sum / static_cast<double>(f.size());
    g.best_genome = pop[best];
    if (pop[best].has_plasticity()) {
      g.best_eta = pop[best].plasticity()->eta;
      g.best_lambda = pop[best].plasticity()->lambda;
      g.mean_eta = eta_sum / static_cast<double>(pop.size());
    }
    g.best_neurons = fr[best].neurons;
    g.best_connections = fr[best].connections;
    g.evaluations = log.evaluations;
    if (!log.generations.empty() && g.best_fitness < log.generations.back().best_fitness) {
      throw std::logic_error("elitism violated: best fitness decreased");
    }
    log.generations.push_back(std::move(g));
    return f;
  };

  std::vector<Genome> pop = initial_population(cfg);
  std::vector<double> f = record(0, pop, evaluate(pop));
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    if (stop_when_best_reaches && log.generations.back().best_fitness >= *stop_when_best_reaches) break;
    pop = ga_generation_step(pop, f, cfg, gen);
    f = record(gen, pop, evaluate(pop));
  }
  return log;
}

std::string generation_to_json_line(const GenerationLog& g) {
  nlohmann::ordered_json j;
  j["generation"] = g.generation;
  j["best_fitness"] = g.best_fitness;
  j["mean_fitness"] = g.mean_fitness;
  j["best_eta"] = g.best_eta ? nlohmann::ordered_json(*g.best_eta) : nlohmann::ordered_json(nullptr);
  j["best_lambda"] = g.best_lambda ? nlohmann::ordered_json(*g.best_lambda) : nlohmann::ordered_json(nullptr);
  j["mean_eta"] = g.mean_eta ? nlohmann::ordered_json(*g.mean_eta) : nlohmann::ordered_json(nullptr);
  j["best_neurons"] = g.best_neurons;
  j["best_connections"] = g.best_connections;
  j["evaluations"] = g.evaluations;
  j["best_genome"] = genome_to_csv_row(g.best_genome);
  return j.dump();
}

std::string ga_summary_csv_header() {
  return "run_seed,condition,env,generations,final_best_fitness,final_eta,final_lambda,neurons,connections,"
         "gen_to_0.75,gen_to_1.0,evaluations";
}

std::string ga_summary_csv_row(const GARunLog& log) {
  const auto& last = log.generations.back();
  auto opt = [](const std::optional<double>& v) { return v ? exact(*v) : std::string(); };
  auto gen = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  return std::to_string(log.config.seed) + "," + to_string(log.config.condition) + "," +
         log.config.spec.descriptor() + "," + std::to_string(last.generation) + "," + exact(last.best_fitness) + "," +
         opt(last.best_eta) + "," + opt(last.best_lambda) + "," + std::to_string(last.best_neurons) + "," +
         std::to_string(last.best_connections) + "," + gen(log.generation_reaching(0.75)) + "," +
         gen(log.generation_reaching(1.0)) + "," + std::to_string(log.evaluations);
}

}  // namespace morphoplast
