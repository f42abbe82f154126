// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Heavy criteria run the real pipelines and leave their outputs in
// the output directory (default: ./acceptance_out).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "morphoplast/controls.hpp"
#include "morphoplast/evolution.hpp"
#include "morphoplast/experiments.hpp"
#include "morphoplast/morphogenesis.hpp"
#include "morphoplast/rng.hpp"
#include "morphoplast/stats.hpp"
#include "morphoplast/sweep_analysis.hpp"
#include "oracles.hpp"

using namespace morphoplast;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path out;
  std::size_t workers = 1;
  bool resume = false;
  std::vector<GARunLog> c_runs;  // filled by criterion 7, reused by 12
  std::string pool_file;
  std::map<std::string, Stratum> strata;  // pool network id -> stratum
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

RunOptions run_opts(const Context& ctx) {
  RunOptions o;
  o.workers = ctx.workers;
  o.resume = ctx.resume;
  return o;
}

// ------------------------------------------------------------ exact suites

Outcome c1_plasticity(Context&) {
  Rng r(1001);
  double worst = 0.0;
  DevelopedNetwork net;
  net.width = 2;
  net.height = 1;
  net.neurons = {{0, 0, Role::hidden}, {1, 0, Role::hidden}};
  net.connections = {{0, 1, 0.0}};
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    const double w = r.uniform(-2.0, 2.0), xi = r.uniform(-1.0, 1.0), xj = r.uniform(-1.0, 1.0);
    const double eta = r.uniform(-0.5, 0.5), lambda = r.uniform(0.0, 0.1);
    net.connections[0].weight = w;
    PlasticNetwork pn(net, 0, 0);
    const std::array<double, 2> x = {xi, xj};
    pn.set_activations(x);
    pn.apply_plasticity({eta, lambda});
    worst = std::max(worst, std::fabs(pn.live_weights()[0] - oracle::plastic_weight(w, xi, xj, eta, lambda)));
  }
  return {worst <= 1e-12, std::to_string(n) + " tuples, max |error| = " + fmt(worst)};
}

std::vector<DevelopedNetwork> functional_networks(std::size_t want, std::uint64_t first_seed) {
  std::vector<DevelopedNetwork> out;
  for (std::uint64_t s = first_seed; out.size() < want; ++s) {
    auto n = develop(sample_random(s), 10, 10, 200);
    if (n.functional_for(4, 2)) out.push_back(std::move(n));
  }
  return out;
}

Outcome c2_null_identity(Context&) {
  const auto nets = functional_networks(50, 20000);
  std::size_t identical = 0, episodes = 0;
  for (const auto& n : nets) {
    const auto base = evaluate_baseline(n, cartpole_spec());
    const auto nul = evaluate_network(n, cartpole_spec(), {0.0, 0.0}, Mode::plastic);
    for (std::size_t i = 0; i < base.rewards.size(); ++i) {
      ++episodes;
      identical += base.rewards[i] == nul.rewards[i];
    }
  }
  return {identical == episodes && episodes == 50 * 20,
          std::to_string(identical) + "/" + std::to_string(episodes) + " episodes identical over 50 networks"};
}

Outcome c3_physics(Context&) {
  Rng r(3003);
  const double pi = 3.141592653589793;
  double worst = 0.0;
  struct Variant {
    const char* name;
    EnvKind kind;
    double gravity, pole_mass, link2;
  };
  const std::vector<Variant> variants = {{"cartpole", EnvKind::cartpole, 9.8, 0.1, 1.0},
                                         {"cartpole+pole_mass_x10", EnvKind::cartpole, 9.8, 1.0, 1.0},
                                         {"cartpole+gravity_x2", EnvKind::cartpole, 20.0, 0.1, 1.0},
                                         {"acrobot", EnvKind::acrobot, 9.8, 0.1, 1.0},
                                         {"acrobot+link2_mass_x2", EnvKind::acrobot, 9.8, 0.1, 2.0}};
  // Physics comes from the library's own switch logic on a spec whose switch
  // has already happened, so the perturbation wiring is covered too.
  for (const auto& v : variants) {
    const std::string d = v.name;
    EnvSpec spec = EnvSpec::from_descriptor(d.find('+') == std::string::npos ? d : d + "@1");
    for (int i = 0; i < 1000; ++i) {
      std::array<double, 4> s, got, want;
      if (v.kind == EnvKind::cartpole) {
        s = {r.uniform(-2.4, 2.4), r.uniform(-3, 3), r.uniform(-0.21, 0.21), r.uniform(-3, 3)};
        const std::size_t a = r.below(2);
        got = cartpole_transition(s, a, cartpole_physics_at(spec, 1));
        want = oracle::cartpole_step(s, a, v.gravity, v.pole_mass);
      } else {
        s = {r.uniform(-pi, pi), r.uniform(-pi, pi), r.uniform(-4 * pi, 4 * pi), r.uniform(-9 * pi, 9 * pi)};
        const std::size_t a = r.below(3);
        got = acrobot_transition(s, a, acrobot_physics_at(spec, 1));
        want = oracle::acrobot_step(s, a, v.link2);
      }
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::fabs(got[k] - want[k]));
    }
  }
  const auto h = cartpole_transition({0, 0, 0, 0}, 1, CartPolePhysics{});
  const std::array<double, 4> hand = {0.0, 0.19512, 0.0, -0.29268};
  bool hand_ok = true;
  for (int k = 0; k < 4; ++k) hand_ok = hand_ok && std::round(h[k] * 1e5) / 1e5 == hand[k];
  return {worst <= 1e-9 && hand_ok, "5 variants x 1000 steps, max |error| = " + fmt(worst) +
                                        "; hand step (" + fmt(h[0], 6) + ", " + fmt(h[1], 6) + ", " + fmt(h[2], 6) +
                                        ", " + fmt(h[3], 6) + ")" + (hand_ok ? " ok" : " MISMATCH")};
}

Outcome c4_development(Context&) {
  std::size_t same = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Genome g = sample_random(40000 + s);
    same += develop(g, 10, 10, 200).hash() == develop(g, 10, 10, 200).hash();
  }
  double drift = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Developer dev(sample_random(s), 10, 10);
    Rng r(s);
    for (auto& f : dev.mutable_state().conc) {
      for (auto& v : f) v = r.uniform(0.0, 1.0);
    }
    std::array<double, 3> before{};
    for (std::size_t m = 0; m < 3; ++m) before[m] = dev.state().total(m);
    for (int t = 0; t < 1000; ++t) dev.diffuse();
    for (std::size_t m = 0; m < 3; ++m) drift = std::max(drift, std::fabs(dev.state().total(m) - before[m]));
  }
  return {same == 200 && drift <= 1e-9,
          std::to_string(same) + "/200 identical hashes; max mass drift after 1000 diffusion steps = " + fmt(drift)};
}

Outcome c5_regret(Context&) {
  Rng r(5005);
  std::size_t checked = 0, agree = 0;
  for (std::size_t n = 1; n <= 10; ++n) {
    for (std::size_t p = 1; p <= 20; ++p) {
      std::vector<PlasticityParams> pts;
      for (std::size_t j = 0; j < p; ++j) pts.push_back({0.001 * static_cast<double>(j) - 0.01, 0.0});
      for (int rep = 0; rep < 10; ++rep) {
        DeltaMatrix m;
        m.points = pts;
        for (std::size_t i = 0; i < n; ++i) {
          m.networks.push_back(std::to_string(i));
          std::vector<double> row(p);
          // integer values make ties common
          for (auto& v : row) v = rep % 2 ? std::round(r.uniform(-5, 8)) : r.uniform(-100, 150);
          m.delta.push_back(row);
        }
        const auto got = oracle_and_regret(m);
        const auto want = oracle::brute_regret(m.delta);
        ++checked;
        const bool same_def = got.regret.has_value() == want.regret.has_value();
        const bool ok = std::fabs(got.oracle_mean - want.oracle_mean) <= 1e-9 &&
                        std::fabs(got.best_fixed_mean - want.best_fixed_mean) <= 1e-9 && same_def &&
                        (!got.regret || std::fabs(*got.regret - *want.regret) <= 1e-12);
        agree += ok;
      }
    }
  }
  DeltaMatrix fx;
  fx.networks = {"a", "b"};
  fx.points = {{-0.01, 0.0}, {0.01, 0.0}};
  fx.delta = {{2.0, 0.0}, {0.0, 2.0}};
  const auto f = oracle_and_regret(fx);
  const bool fixture = f.regret && *f.regret == 0.5;
  return {agree == checked && fixture, std::to_string(agree) + "/" + std::to_string(checked) +
                                           " matrices agree; fixture regret = " +
                                           (f.regret ? fmt(*f.regret) : std::string("undefined"))};
}

Outcome c6_stats(Context&) {
  const double s1 = stats::sign_test_binomial(21, 30);
  const double s2 = stats::sign_test_binomial(18, 30);
  const auto d = stats::cohens_d(std::vector<double>{2, 4}, std::vector<double>{0, 2});
  const double mw = stats::mann_whitney_u(std::vector<double>{1, 2}, std::vector<double>{3, 4}).p;
  const double wx = stats::wilcoxon_signed(std::vector<double>{-1, -1, -1}).p;
  const bool ok = std::fabs(s1 - 0.043) <= 0.001 && std::fabs(s2 - 0.36) <= 0.01 && d &&
                  std::fabs(*d - 1.4142) <= 1e-4 && std::fabs(*d - std::sqrt(2.0)) <= 1e-6 &&
                  std::fabs(mw - 1.0 / 3.0) <= 1e-6 && std::fabs(wx - 0.25) <= 1e-6;
  return {ok, "sign(21,30) = " + fmt(s1) + ", sign(18,30) = " + fmt(s2) + ", d = " + fmt(d.value_or(NAN), 8) +
                  ", MW exact p = " + fmt(mw, 6) + ", Wilcoxon p = " + fmt(wx, 6)};
}

// ------------------------------------------------------------ GA criteria

constexpr std::uint64_t kGaSeeds = 10;

Outcome c7_ga(Context& ctx) {
  bool monotone = true, counts = true, length = true, eta_ok = true;
  std::ostringstream note;
  ctx.c_runs.clear();
  for (std::uint64_t s = 0; s < kGaSeeds; ++s) {
    auto cfg = GAConfig::for_env(cartpole_spec(), Condition::C, s);
    cfg.workers = ctx.workers;
    GARunLog log = run_ga(cfg);
    for (std::size_t g = 1; g < log.generations.size(); ++g) {
      monotone = monotone && log.generations[g].best_fitness >= log.generations[g - 1].best_fitness;
    }
    counts = counts && log.evaluations == 10050 && log.generations.size() == 201;
    for (const auto& g : log.generations) {
      length = length && g.best_genome.size() == 56;
      eta_ok = eta_ok && g.best_genome.plasticity() && std::fabs(g.best_genome.plasticity()->eta) <= 0.5;
      eta_ok = eta_ok && g.mean_eta && std::fabs(*g.mean_eta) <= 0.5;
    }
    note << (s ? "," : "") << fmt(log.generations.back().best_fitness, 3);
    ctx.c_runs.push_back(std::move(log));
  }
  // Only the best genome is logged per generation; also push a population
  // through 50 rounds of the operators and check every genome.
  const auto& cfg0 = ctx.c_runs.front().config;
  auto pop = initial_population(cfg0);
  std::vector<double> f(pop.size(), 0.0);
  for (int g = 1; g <= 50; ++g) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<double>((i * 7 + g) % 13);
    pop = ga_generation_step(pop, f, cfg0, g);
    for (const auto& x : pop) {
      length = length && x.size() == 56;
      eta_ok = eta_ok && std::fabs(x.plasticity()->eta) <= 0.5;
    }
  }
  return {monotone && counts && length && eta_ok,
          std::string("10 runs: monotone=") + (monotone ? "yes" : "no") + " evaluations=10050:" +
              (counts ? "yes" : "no") + " length56=" + (length ? "yes" : "no") + " eta-in-range=" +
              (eta_ok ? "yes" : "no") + "; final best = [" + note.str() + "]"};
}

Outcome c12_convergence(Context& ctx) {
  std::ostringstream note;
  bool ok = true;
  for (Condition c : {Condition::A, Condition::B, Condition::C}) {
    std::vector<double> reach;  // generation reaching 1.0, or +inf
    for (std::uint64_t s = 0; s < kGaSeeds; ++s) {
      std::optional<int> g;
      if (c == Condition::C && ctx.c_runs.size() == kGaSeeds) {
        g = ctx.c_runs[s].generation_reaching(1.0);
      } else {
        auto cfg = GAConfig::for_env(cartpole_spec(), c, s);
        cfg.generations = 10;
        cfg.workers = ctx.workers;
        g = run_ga(cfg, 1.0).generation_reaching(1.0);
      }
      reach.push_back(g ? static_cast<double>(*g) : INFINITY);
    }
    std::sort(reach.begin(), reach.end());
    // median of 10: mean of the 5th and 6th order statistics
    const double med = (reach[4] + reach[5]) / 2.0;
    const auto hits = std::count_if(reach.begin(), reach.end(), [](double v) { return v <= 10; });
    ok = ok && med <= 10.0;
    note << to_string(c) << ": median gen " << (std::isinf(med) ? std::string("never") : fmt(med)) << " (" << hits
         << "/10 by gen 10)  ";
  }
  return {ok, note.str()};
}

// ------------------------------------------------------------ pool criteria

Outcome c8_pool(Context& ctx) {
  RunConfig cfg;
  cfg.kind = ExperimentKind::pool;
  cfg.genomes = 2000;
  cfg.genome_seed = 20000;
  cfg.output_dir = (ctx.out / "pool").string();
  run_experiment(cfg, run_opts(ctx));
  ctx.pool_file = cfg.output_dir + "/networks.jsonl";
  const auto nets = read_network_file(ctx.pool_file);
  std::size_t max_neurons = 0;
  for (const auto& n : nets) max_neurons = std::max(max_neurons, n.neurons.size());
  ctx.strata.clear();
  std::map<Stratum, std::size_t> counts;
  for (const auto& r : read_records(cfg.output_dir + "/baselines.jsonl")) {
    ctx.strata.emplace(r.network_id, stratify(r.mean_reward, EnvKind::cartpole));
  }
  for (const auto& n : nets) ++counts[ctx.strata.at(n.id())];
  const double weak = static_cast<double>(counts[Stratum::Weak]) / static_cast<double>(nets.size());
  std::ostringstream note;
  note << nets.size() << " networks, Weak fraction " << fmt(weak) << " (";
  for (Stratum s : kAllStrata) note << to_string(s) << " " << counts[s] << (s == Stratum::Perfect ? "" : ", ");
  note << "), max neurons " << max_neurons;
  return {nets.size() == 2000 && weak >= 0.85 && weak <= 0.99 && max_neurons <= 100, note.str()};
}

void ensure_pool(Context& ctx) {
  if (ctx.pool_file.empty()) c8_pool(ctx);
}

struct SweepSummary {
  AntiVsHebbian avh;
  std::map<Stratum, OracleRegret> regret;
  std::map<Stratum, std::size_t> n;
};

std::optional<SweepSummary> g_sweep;

SweepSummary run_extended_sweep(Context& ctx) {
  if (g_sweep) return *g_sweep;
  ensure_pool(ctx);
  RunConfig cfg;
  cfg.kind = ExperimentKind::sweep;
  cfg.pool_file = ctx.pool_file;
  cfg.sweep_grid = "extended248";
  cfg.strata = {Stratum::LowMid, Stratum::HighMid};
  cfg.output_dir = (ctx.out / "sweep_extended248").string();
  run_experiment(cfg, run_opts(ctx));
  const auto records = read_records(cfg.output_dir + "/records.jsonl");
  std::vector<std::string> ids;
  std::map<Stratum, std::vector<std::string>> by;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (r.mode != Mode::baseline || !seen.insert(r.network_id).second) continue;
    ids.push_back(r.network_id);
    by[stratify(r.mean_reward, EnvKind::cartpole)].push_back(r.network_id);
  }
  const SweepGrid grid = build_grid("extended248");
  SweepSummary s;
  s.avh = anti_vs_hebbian(delta_matrix(records, ids, cartpole_spec(), grid, Mode::plastic));
  for (const auto& [st, members] : by) {
    s.n[st] = members.size();
    s.regret[st] = oracle_and_regret(delta_matrix(records, members, cartpole_spec(), grid, Mode::plastic));
  }
  g_sweep = s;
  return s;
}

Outcome c9_direction(Context& ctx) {
  const auto s = run_extended_sweep(ctx);
  std::size_t nets = 0;
  for (const auto& [st, k] : s.n) nets += k;
  const bool ok = s.avh.d && *s.avh.d > 0.0 && !s.avh.mann_whitney.undefined && s.avh.mann_whitney.p < 0.05;
  return {ok, std::to_string(nets) + " LowMid+HighMid networks, " + std::to_string(s.avh.n_anti) + " anti vs " +
                  std::to_string(s.avh.n_hebbian) + " Hebbian deltas: d = " + fmt(s.avh.d.value_or(NAN)) +
                  ", Mann-Whitney p = " + fmt(s.avh.mann_whitney.p)};
}

Outcome c10_regret(Context& ctx) {
  const auto s = run_extended_sweep(ctx);
  bool ok = !s.regret.empty();
  std::ostringstream note;
  for (const auto& [st, r] : s.regret) {
    ok = ok && r.regret && *r.regret >= 0.3;
    note << to_string(st) << " (n=" << s.n.at(st) << "): O = " << fmt(r.oracle_mean) << ", F = "
         << fmt(r.best_fixed_mean) << ", regret = " << (r.regret ? fmt(*r.regret) : std::string("undefined")) << "  ";
  }
  return {ok, note.str()};
}

Outcome c11_dose(Context& ctx) {
  ensure_pool(ctx);
  RunConfig cfg;
  cfg.kind = ExperimentKind::dose_response;
  cfg.env = "cartpole+pole_mass_x10@200";
  cfg.pool_file = ctx.pool_file;
  cfg.sweep_grid = "coarse22";
  cfg.switch_times = {100, 200, 300, 400};
  cfg.strata = {Stratum::LowMid, Stratum::HighMid, Stratum::NearPerfect, Stratum::Perfect};
  cfg.output_dir = (ctx.out / "dose_response").string();
  run_experiment(cfg, run_opts(ctx));
  const auto records = read_records(cfg.output_dir + "/records.jsonl");
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (r.mode == Mode::baseline && r.spec == "cartpole" && seen.insert(r.network_id).second) ids.push_back(r.network_id);
  }
  const SweepGrid grid = build_grid("coarse22");
  std::vector<std::vector<double>> per_switch;
  for (int t : cfg.switch_times) {
    const auto spec = make_nonstationary(cartpole_spec(), Perturbation::pole_mass_x10, t);
    per_switch.push_back(oracle_and_regret(delta_matrix(records, ids, spec, grid, Mode::off_on)).oracle_delta);
  }
  const auto dr = dose_response(cfg.switch_times, per_switch);
  std::ostringstream note;
  note << ids.size() << " competent networks; mean oracle delta by duration";
  for (std::size_t k = 0; k < dr.durations.size(); ++k) note << " " << dr.durations[k] << ":" << fmt(dr.mean_oracle_delta[k]);
  note << "; rho = " << fmt(dr.rho.value_or(NAN));
  return {ids.size() >= 30 && dr.strictly_increasing && dr.rho && *dr.rho > 0.0, note.str()};
}

Outcome c13_controls(Context& ctx) {
  ensure_pool(ctx);
  RunConfig cfg;
  cfg.kind = ExperimentKind::random_control;
  cfg.pool_file = ctx.pool_file;
  cfg.replicates = 5;
  cfg.control_seed = 13;
  cfg.output_dir = (ctx.out / "random_control").string();
  const auto res = run_experiment(cfg, run_opts(ctx));
  const auto controls = read_network_file(cfg.output_dir + "/controls.jsonl");
  std::size_t sources = 0;
  for (const auto& [id, s] : ctx.strata) sources += s != Stratum::Weak;
  std::map<std::string, DevelopedNetwork> pool;
  for (const auto& n : load_unique_networks(ctx.pool_file)) pool.emplace(n.id(), n);
  bool weights = true, matched = true;
  for (const auto& c : controls) {
    for (const auto& k : c.connections) weights = weights && k.weight >= kControlWeightLo && k.weight <= kControlWeightHi;
  }
  // every map row pairs a source with a control of the same size
  std::ifstream map(cfg.output_dir + "/controls_map.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(map, line);
  std::getline(map, line);
  while (std::getline(map, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    const auto& src = pool.at(f[0]);
    matched = matched && std::stoul(f[3]) == src.neurons.size() && std::stoul(f[4]) == src.connections.size();
    ++rows;
  }
  const bool table = fs::exists(cfg.output_dir + "/control_competence.csv");
  std::string ratio;
  {
    std::ifstream t(cfg.output_dir + "/control_competence.csv");
    while (std::getline(t, line)) {
      if (line.rfind("source_to_control", 0) == 0) ratio = line.substr(line.rfind(',') + 1);
    }
  }
  return {controls.size() == 5 * sources && rows == controls.size() && weights && matched && table,
          std::to_string(sources) + " sources -> " + std::to_string(controls.size()) +
              " controls; weights in [0.01, 1]: " + (weights ? "yes" : "no") + "; counts matched: " +
              (matched ? "yes" : "no") + "; competence ratio (reported only) = " + (ratio.empty() ? "n/a" : ratio) +
              "; " + std::to_string(res.files.size()) + " files"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria 1-13"};
  std::vector<int> only;
  std::string out = "acceptance_out";
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  bool resume = false;
  app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
  app.add_option("--out", out, "output directory for pipeline artefacts");
  app.add_option("--workers", workers, "worker threads");
  app.add_flag("--resume", resume, "reuse existing pipeline outputs");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.out = out;
  ctx.workers = workers;
  ctx.resume = resume;
  if (!resume) fs::remove_all(ctx.out);
  fs::create_directories(ctx.out);

  const std::vector<std::pair<int, std::function<Outcome(Context&)>>> all = {
      {1, c1_plasticity}, {2, c2_null_identity}, {3, c3_physics},   {4, c4_development}, {5, c5_regret},
      {6, c6_stats},      {7, c7_ga},            {8, c8_pool},      {9, c9_direction},   {10, c10_regret},
      {11, c11_dose},     {12, c12_convergence}, {13, c13_controls}};
  int failures = 0;
  for (const auto& [id, fn] : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("criterion %2d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%s: %d failure(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
