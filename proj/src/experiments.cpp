#include "morphoplast/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

#include "morphoplast/controls.hpp"
#include "morphoplast/genome.hpp"
#include "morphoplast/morphogenesis.hpp"
#include "morphoplast/stats.hpp"

namespace morphoplast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

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

std::string opt_str(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); }

void say(const RunOptions& o, const std::string& s) {
  if (o.log) *o.log << s << '\n';
}

EnvSpec static_of(const EnvSpec& s) {
  EnvSpec out = s;
  out.perturbation.reset();
  return out;
}

std::string static_descriptor(const std::string& d) { return static_of(EnvSpec::from_descriptor(d)).descriptor(); }

JsonlAppender::KeyOf record_key() {
  return [](const json& j) { return j.at("key").get<std::string>(); };
}

// Shared sink bookkeeping for record files.
struct RecordWriter {
  JsonlAppender app;
  RunResult& result;
  std::vector<EvalRecord> new_records;

  RecordWriter(const std::string& path, const Provenance& prov, bool resume, RunResult& res)
      : app(path, prov, resume, record_key()), result(res) {}

  RecordSink sink() {
    return [this](const EvalRecord& r) {
      if (app.has(r.key())) return;
      app.append(r.key(), record_to_json(r).dump());
      result.episodes += r.rewards.size();
      result.degenerate_episodes += static_cast<std::size_t>(r.degenerate_episodes);
    };
  }
  std::function<bool(const std::string&)> skip() {
    return [this](const std::string& k) { return app.has(k); };
  }
};

void finish_degenerate(RunResult& res, const RunConfig& cfg) {
  if (res.episodes == 0) return;
  const double frac = static_cast<double>(res.degenerate_episodes) / static_cast<double>(res.episodes);
  res.degenerate_exceeded = frac > cfg.degenerate_tolerance;
}

std::vector<DevelopedNetwork> select_networks(const RunConfig& cfg, const RunOptions& opt, const EnvSpec& spec,
                                              BaselineCache& cache, std::map<std::string, Stratum>& strata,
                                              const std::vector<Stratum>& wanted) {
  const auto all = load_unique_networks(cfg.pool_file);
  strata = stratify_networks(all, static_of(spec), cfg.seeds, opt.workers, cache);
  std::vector<DevelopedNetwork> out;
  for (const auto& n : all) {
    const Stratum s = strata.at(n.id());
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), s) == wanted.end()) continue;
    out.push_back(n);
    if (cfg.max_networks && out.size() >= cfg.max_networks) break;
  }
  return out;
}

std::vector<SweepTask> static_baseline_tasks(const std::vector<DevelopedNetwork>& nets, const EnvSpec& spec) {
  std::vector<SweepTask> t;
  for (const auto& n : nets) t.push_back({&n, static_of(spec), {}, Mode::baseline});
  return t;
}

// ---------------------------------------------------------------- pipelines

RunResult run_pool(const RunConfig& cfg, const RunOptions& opt, RunResult res) {
  const EnvSpec spec = EnvSpec::from_descriptor(cfg.env);
  std::vector<Genome> genomes;
  if (!cfg.genome_file.empty()) {
    genomes = read_genome_file(cfg.genome_file,
                               spec.kind == EnvKind::acrobot ? acrobot_plasticity_range() : cartpole_plasticity_range());
  } else {
    for (std::size_t i = 0; i < cfg.genomes; ++i) genomes.push_back(sample_random(cfg.genome_seed + i));
  }
  const Provenance prov_g = make_provenance(cfg, "morphoplast.genomes");
  const std::string gpath = res.output_dir + "/genomes.csv";
  write_genome_file(gpath, genomes, prov_g.csv_comment().substr(2));
  res.files.push_back(gpath);

  std::vector<DevelopedNetwork> nets(genomes.size());
  const std::string snap_root = res.output_dir + "/snapshots";
  parallel_for(genomes.size(), opt.workers, [&](std::size_t i) {
    SnapshotSink snap;
    std::string dir;
    if (opt.snapshot_development) {
      dir = snap_root + "/genome_" + std::to_string(i);
      fs::create_directories(dir);
      const std::size_t every = std::max<std::size_t>(1, cfg.snapshot_every);
      snap = [&, dir, every](int it, const GridState& s) {
        if (static_cast<std::size_t>(it) % every != 0 && static_cast<std::size_t>(it) != cfg.iterations) return;
        char name[32];
        std::snprintf(name, sizeof(name), "/iter_%05d.csv", it);
        std::ofstream out(dir + name, std::ios::binary | std::ios::trunc);
        out << snapshot_csv(it, s);
      };
    }
    nets[i] = develop(genomes[i], cfg.grid_width, cfg.grid_height, cfg.iterations, snap);
  });
  if (opt.snapshot_development) res.files.push_back(snap_root);

  const std::string npath = res.output_dir + "/networks.jsonl";
  write_network_file(npath, nets, make_provenance(cfg, "morphoplast.networks").json_line());
  res.files.push_back(npath);

  BaselineCache cache;
  const std::string rpath = res.output_dir + "/baselines.jsonl";
  RecordWriter w(rpath, make_provenance(cfg, "morphoplast.eval_records"), opt.resume, res);
  std::vector<SweepTask> tasks;
  for (const auto& n : nets) tasks.push_back({&n, spec, {}, Mode::baseline});
  res.new_evaluations = run_evaluations(tasks, cfg.seeds, opt.workers, cache, w.sink(), w.skip());
  res.files.push_back(rpath);

  std::map<Stratum, std::size_t> counts;
  std::size_t functional = 0;
  for (const auto& n : nets) {
    functional += n.functional_for(observation_size(spec.kind), action_count(spec.kind));
    const auto b = evaluate_baseline(n, spec, cfg.seeds, &cache);
    ++counts[stratify(b.mean_reward, spec.kind)];
  }
  std::vector<std::string> rows;
  const double total = static_cast<double>(nets.size());
  for (Stratum s : kAllStrata) {
    rows.push_back(to_string(s) + "," + std::to_string(counts[s]) + "," +
                   (nets.empty() ? std::string() : fmt_double(static_cast<double>(counts[s]) / total)));
  }
  rows.push_back("functional," + std::to_string(functional) + "," +
                 (nets.empty() ? std::string() : fmt_double(static_cast<double>(functional) / total)));
  const std::string spath = res.output_dir + "/pool_summary.csv";
  write_csv(spath, make_provenance(cfg, "morphoplast.pool_summary"), "stratum,count,fraction", rows);
  res.files.push_back(spath);
  say(opt, "pool: " + std::to_string(nets.size()) + " networks, " + std::to_string(functional) + " functional");
  return res;
}

RunResult run_sweep_like(const RunConfig& cfg, const RunOptions& opt, RunResult res) {
  const EnvSpec spec = EnvSpec::from_descriptor(cfg.env);
  const SweepGrid grid = build_grid(cfg.sweep_grid);
  const Mode mode = cfg.kind == ExperimentKind::off_on ? Mode::off_on : Mode::plastic;
  BaselineCache cache;
  std::map<std::string, Stratum> strata;
  const auto nets = select_networks(cfg, opt, spec, cache, strata, cfg.strata);
  say(opt, "sweep: " + std::to_string(nets.size()) + " networks x " + std::to_string(grid.points.size()) + " points");
  const std::string rpath = res.output_dir + "/records.jsonl";
  RecordWriter w(rpath, make_provenance(cfg, "morphoplast.eval_records"), opt.resume, res);
  std::vector<SweepTask> tasks;
  if (spec.perturbation) tasks = static_baseline_tasks(nets, spec);
  const auto sweep = sweep_tasks(nets, spec, grid, mode);
  tasks.insert(tasks.end(), sweep.begin(), sweep.end());
  res.new_evaluations = run_evaluations(tasks, cfg.seeds, opt.workers, cache, w.sink(), w.skip());
  res.files.push_back(rpath);
  finish_degenerate(res, cfg);
  return res;
}

RunResult run_dose_response(const RunConfig& cfg, const RunOptions& opt, RunResult res) {
  const EnvSpec spec = EnvSpec::from_descriptor(cfg.env);
  const SweepGrid grid = build_grid(cfg.sweep_grid);
  BaselineCache cache;
  std::map<std::string, Stratum> strata;
  const auto nets = select_networks(cfg, opt, spec, cache, strata, cfg.strata);
  const std::string rpath = res.output_dir + "/records.jsonl";
  RecordWriter w(rpath, make_provenance(cfg, "morphoplast.eval_records"), opt.resume, res);
  std::vector<SweepTask> tasks = static_baseline_tasks(nets, spec);
  std::vector<EnvSpec> specs;
  for (int t : cfg.switch_times) {
    specs.push_back(make_nonstationary(static_of(spec), spec.perturbation->change, t));
    const auto s = sweep_tasks(nets, specs.back(), grid, Mode::off_on);
    tasks.insert(tasks.end(), s.begin(), s.end());
  }
  say(opt, "dose_response: " + std::to_string(nets.size()) + " networks, " + std::to_string(tasks.size()) + " tasks");
  res.new_evaluations = run_evaluations(tasks, cfg.seeds, opt.workers, cache, w.sink(), w.skip());
  res.files.push_back(rpath);
  finish_degenerate(res, cfg);

  const auto records = read_records(rpath);
  std::vector<std::string> ids;
  for (const auto& n : nets) ids.push_back(n.id());
  std::vector<std::string> rows;
  std::vector<std::pair<std::string, std::vector<std::string>>> groups = {{"all", ids}};
  for (Stratum s : kAllStrata) {
    std::vector<std::string> sub;
    for (const auto& id : ids) {
      if (strata.at(id) == s) sub.push_back(id);
    }
    if (!sub.empty()) groups.push_back({to_string(s), sub});
  }
  for (const auto& [label, members] : groups) {
    if (members.empty()) continue;
    std::vector<std::vector<double>> per_switch;
    for (const auto& sp : specs) {
      per_switch.push_back(oracle_and_regret(delta_matrix(records, members, sp, grid, Mode::off_on)).oracle_delta);
    }
    const DoseResponse dr = dose_response(cfg.switch_times, per_switch, spec.max_steps);
    for (std::size_t k = 0; k < dr.switch_times.size(); ++k) {
      rows.push_back(label + "," + std::to_string(members.size()) + "," + std::to_string(dr.switch_times[k]) + "," +
                     std::to_string(dr.durations[k]) + "," + fmt_double(dr.mean_oracle_delta[k]) + "," +
                     opt_str(dr.rho) + "," + (dr.ties ? "true" : "false") + "," +
                     (dr.strictly_increasing ? "true" : "false"));
    }
  }
  const std::string dpath = res.output_dir + "/dose_response.csv";
  write_csv(dpath, make_provenance(cfg, "morphoplast.dose_response"),
            "stratum,n,switch_time,post_switch_duration,mean_oracle_delta_r,spearman_rho,ties,strictly_increasing",
            rows);
  res.files.push_back(dpath);
  return res;
}

RunResult run_coevolve(const RunConfig& cfg, const RunOptions& opt, RunResult res) {
  const EnvSpec spec = EnvSpec::from_descriptor(cfg.env);
  const Condition cond = condition_from_string(cfg.condition);
  std::vector<std::string> rows;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    GAConfig ga = GAConfig::for_env(spec, cond, cfg.run_seed + r);
    ga.generations = cfg.generations;
    ga.population = cfg.population;
    ga.width = cfg.grid_width;
    ga.height = cfg.grid_height;
    ga.iterations = cfg.iterations;
    ga.episode_seeds = cfg.seeds;
    ga.workers = opt.workers;
    const std::string path = res.output_dir + "/ga_" + to_string(cond) + "_run" + std::to_string(r) + ".jsonl";
    Provenance prov = make_provenance(cfg, "morphoplast.ga_log");
    prov.seed = ga.seed;
    bool done = false;
    if (opt.resume && fs::exists(path)) {
      try {
        const auto f = read_jsonl(path);
        done = f.header.dump() == json::parse(prov.json_line()).dump() && !f.lines.empty() &&
               f.lines.back().value("complete", false);
      } catch (const std::exception&) {
        done = false;
      }
    }
    if (!done) {
      const GARunLog log = run_ga(ga, cfg.stop_at_fitness);
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << prov.json_line() << '\n';
      for (const auto& g : log.generations) out << generation_to_json_line(g) << '\n';
      json fin;
      fin["complete"] = true;
      fin["evaluations"] = log.evaluations;
      fin["developments"] = log.developments;
      out << fin.dump() << '\n';
      res.new_evaluations += log.developments;
      say(opt, "coevolve: run " + std::to_string(r) + " best " + fmt_double(log.generations.back().best_fitness));
    }
    res.files.push_back(path);
    GARunLog rebuilt = ga_log_from_jsonl(path);
    rebuilt.config = ga;
    rows.push_back(ga_summary_csv_row(rebuilt));
  }
  const std::string spath = res.output_dir + "/ga_summary.csv";
  write_csv(spath, make_provenance(cfg, "morphoplast.ga_summary"), ga_summary_csv_header(), rows);
  res.files.push_back(spath);
  return res;
}

RunResult run_random_control(const RunConfig& cfg, const RunOptions& opt, RunResult res) {
  const EnvSpec spec = static_of(EnvSpec::from_descriptor(cfg.env));
  BaselineCache cache;
  std::map<std::string, Stratum> strata;
  std::vector<Stratum> wanted = cfg.strata;
  if (wanted.empty()) wanted = {Stratum::LowMid, Stratum::HighMid, Stratum::NearPerfect, Stratum::Perfect};
  const auto sources = select_networks(cfg, opt, spec, cache, strata, wanted);
  std::vector<DevelopedNetwork> controls;
  std::vector<std::string> map_rows;
  ControlOptions copt;
  copt.match_roles = cfg.match_roles;
  for (const auto& s : sources) {
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      controls.push_back(generate_matched_rnn(s, r, cfg.control_seed, copt));
      map_rows.push_back(s.id() + "," + std::to_string(r) + "," + controls.back().id() + "," +
                         std::to_string(controls.back().neurons.size()) + "," +
                         std::to_string(controls.back().connections.size()));
    }
  }
  const std::string npath = res.output_dir + "/controls.jsonl";
  write_network_file(npath, controls, make_provenance(cfg, "morphoplast.networks").json_line());
  res.files.push_back(npath);
  const std::string mpath = res.output_dir + "/controls_map.csv";
  write_csv(mpath, make_provenance(cfg, "morphoplast.controls_map"),
            "source_id,replicate,control_id,neurons,connections", map_rows);
  res.files.push_back(mpath);

  const std::string rpath = res.output_dir + "/control_baselines.jsonl";
  RecordWriter w(rpath, make_provenance(cfg, "morphoplast.eval_records"), opt.resume, res);
  std::vector<SweepTask> tasks;
  for (const auto& n : sources) tasks.push_back({&n, spec, {}, Mode::baseline});
  for (const auto& n : controls) tasks.push_back({&n, spec, {}, Mode::baseline});
  res.new_evaluations = run_evaluations(tasks, cfg.seeds, opt.workers, cache, w.sink(), w.skip());
  res.files.push_back(rpath);

  auto tally = [&](const std::vector<DevelopedNetwork>& nets, const std::string& label) {
    std::map<Stratum, std::size_t> c;
    std::size_t functional = 0;
    for (const auto& n : nets) {
      functional += n.functional_for(observation_size(spec.kind), action_count(spec.kind));
      ++c[stratify(evaluate_baseline(n, spec, cfg.seeds, &cache).mean_reward, spec.kind)];
    }
    const std::size_t competent = nets.size() - c[Stratum::Weak];
    std::string row = label + "," + std::to_string(nets.size()) + "," + std::to_string(functional);
    for (Stratum s : kAllStrata) row += "," + std::to_string(c[s]);
    row += "," + std::to_string(competent) + "," +
           (nets.empty() ? std::string() : fmt_double(static_cast<double>(competent) / static_cast<double>(nets.size())));
    return std::make_pair(row, nets.empty() ? 0.0 : static_cast<double>(competent) / static_cast<double>(nets.size()));
  };
  const auto [src_row, src_rate] = tally(sources, "source");
  const auto [ctl_row, ctl_rate] = tally(controls, "random_control");
  std::vector<std::string> rows = {src_row, ctl_row};
  rows.push_back("source_to_control_competence_ratio,,,,,,,,," + (ctl_rate > 0.0 ? fmt_double(src_rate / ctl_rate) : ""));
  const std::string cpath = res.output_dir + "/control_competence.csv";
  write_csv(cpath, make_provenance(cfg, "morphoplast.control_competence"),
            "group,n,functional,Weak,LowMid,HighMid,NearPerfect,Perfect,competent,competence_rate", rows);
  res.files.push_back(cpath);
  say(opt, "random_control: " + std::to_string(sources.size()) + " sources, " + std::to_string(controls.size()) +
               " controls");
  return res;
}

RunResult run_report(const RunConfig& cfg, const RunOptions& opt, RunResult res) {
  say(opt, "report: " + std::to_string(cfg.records.size()) + " record files, " + std::to_string(cfg.ga_logs.size()) + " GA logs");
  std::vector<EvalRecord> records, ns;
  for (const auto& p : cfg.records) {
    auto r = read_records(p);
    records.insert(records.end(), r.begin(), r.end());
  }
  for (const auto& p : cfg.ns_records) {
    auto r = read_records(p);
    ns.insert(ns.end(), r.begin(), r.end());
  }
  const ReportTables t = build_report(records, ns);
  std::vector<std::string> t1, t2;
  for (const auto& r : t.rows) {
    t1.push_back(table1_row(r));
    t2.push_back(table2_row(r));
  }
  auto emit = [&](const std::string& name, const std::string& schema, const std::string& header,
                  const std::vector<std::string>& rows) {
    const std::string path = res.output_dir + "/" + name;
    write_csv(path, make_provenance(cfg, schema), header, rows);
    res.files.push_back(path);
  };
  emit("table1.csv", "morphoplast.table1", table1_header(), t1);
  emit("table2.csv", "morphoplast.table2", table2_header(), t2);
  emit("heatmap.csv", "morphoplast.heatmap", "spec,mode,stratum,eta,lambda,n,mean_delta_r", t.heatmap);
  emit("survival.csv", "morphoplast.survival", "spec,mode,stratum,t,unsolved_no_plasticity,unsolved_oracle",
       t.survival);
  emit("quintiles.csv", "morphoplast.quintiles", "spec,mode,quintile,n_networks_total,anti_hebbian_fraction",
       t.quintiles);

  // GA logs: eta trajectories plus per-condition summaries.
  std::vector<std::string> traj, summary;
  std::map<std::string, std::vector<GARunLog>> by_cond;
  for (const auto& p : cfg.ga_logs) {
    const auto f = read_jsonl(p);
    const std::string cond = f.header.at("config").value("condition", "?");
    const std::string run = fs::path(p).stem().string();
    for (const auto& l : f.lines) {
      if (!l.contains("generation")) continue;
      auto val = [&](const char* k) { return l.at(k).is_null() ? std::string() : fmt_double(l.at(k).get<double>()); };
      traj.push_back(run + "," + cond + "," + std::to_string(l.at("generation").get<int>()) + "," +
                     val("best_fitness") + "," + val("mean_fitness") + "," + val("best_eta") + "," + val("mean_eta"));
    }
    GARunLog log = ga_log_from_jsonl(p);
    log.config.condition = condition_from_string(cond);
    by_cond[cond].push_back(std::move(log));
  }
  std::map<std::string, std::vector<double>> conns;
  for (const auto& [cond, logs] : by_cond) {
    std::vector<double> fit, g75, g1, eta, cc;
    std::uint64_t neg = 0, with_eta = 0;
    for (const auto& l : logs) {
      const auto& last = l.generations.back();
      fit.push_back(last.best_fitness);
      cc.push_back(static_cast<double>(last.best_connections));
      if (auto g = l.generation_reaching(0.75)) g75.push_back(*g);
      if (auto g = l.generation_reaching(1.0)) g1.push_back(*g);
      if (last.best_eta) {
        ++with_eta;
        neg += *last.best_eta < 0.0;
        eta.push_back(*last.best_eta);
      }
    }
    conns[cond] = cc;
    auto med = [](const std::vector<double>& v) { return v.empty() ? std::string() : fmt_double(stats::percentile(v, 50)); };
    summary.push_back(cond + "," + std::to_string(logs.size()) + "," + med(fit) + "," + med(g75) + "," + med(g1) + "," +
                      std::to_string(g1.size()) + "," + med(eta) + "," + std::to_string(neg) + "," +
                      std::to_string(with_eta) + "," +
                      (with_eta ? fmt_double(stats::sign_test_binomial(neg, with_eta)) : std::string()) + "," + med(cc));
  }
  std::vector<std::string> sparsity;
  const std::size_t pairs = conns.size() * (conns.size() - (conns.empty() ? 0 : 1)) / 2;
  for (auto a = conns.begin(); a != conns.end(); ++a) {
    for (auto b = std::next(a); b != conns.end(); ++b) {
      if (a->second.empty() || b->second.empty()) continue;
      const auto mw = stats::mann_whitney_u(a->second, b->second);
      sparsity.push_back(a->first + "," + b->first + "," + fmt_double(stats::percentile(a->second, 50)) + "," +
                         fmt_double(stats::percentile(b->second, 50)) + "," + fmt_double(mw.statistic) + "," +
                         fmt_double(mw.p) + "," + fmt_double(stats::bonferroni(mw.p, pairs)) + "," +
                         stats::to_string(mw.method));
    }
  }
  emit("eta_trajectory.csv", "morphoplast.eta_trajectory", "run,condition,generation,best_fitness,mean_fitness,best_eta,mean_eta",
       traj);
  emit("ga_conditions.csv", "morphoplast.ga_conditions",
       "condition,runs,median_final_fitness,median_gen_to_0.75,median_gen_to_1.0,runs_reaching_1.0,median_final_eta,"
       "negative_eta_runs,runs_with_eta,sign_test_p,median_connections",
       summary);
  emit("ga_sparsity.csv", "morphoplast.ga_sparsity",
       "condition_a,condition_b,median_connections_a,median_connections_b,u,p,p_bonferroni,method", sparsity);
  return res;
}

}  // namespace

std::string resolve_output_dir(const RunConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  const char* root = std::getenv(kOutputRootEnv);
  const std::string base = root && *root ? root : "runs";
  return base + "/" + to_string(cfg.kind);
}

Provenance make_provenance(const RunConfig& cfg, const std::string& schema) {
  Provenance p;
  p.schema = schema;
  p.config_hash = cfg.hash();
  p.seed = cfg.primary_seed();
  p.config = cfg.to_json();
  return p;
}

std::vector<DevelopedNetwork> load_unique_networks(const std::string& path) {
  std::vector<DevelopedNetwork> out;
  std::set<std::string> seen;
  for (auto& n : read_network_file(path)) {
    if (seen.insert(n.id()).second) out.push_back(std::move(n));
  }
  return out;
}

std::map<std::string, Stratum> stratify_networks(const std::vector<DevelopedNetwork>& nets, const EnvSpec& spec,
                                                 const std::vector<std::uint64_t>& seeds, std::size_t workers,
                                                 BaselineCache& cache) {
  std::vector<double> means(nets.size());
  parallel_for(nets.size(), workers,
               [&](std::size_t i) { means[i] = evaluate_baseline(nets[i], spec, seeds, &cache).mean_reward; });
  std::map<std::string, Stratum> out;
  for (std::size_t i = 0; i < nets.size(); ++i) out[nets[i].id()] = stratify(means[i], spec.kind);
  return out;
}

RunResult run_experiment(const RunConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  RunResult res;
  res.output_dir = resolve_output_dir(cfg);
  fs::create_directories(res.output_dir);
  {
    const std::string cpath = res.output_dir + "/config.resolved";
    std::ofstream out(cpath, std::ios::binary | std::ios::trunc);
    out << make_provenance(cfg, "morphoplast.config").csv_comment() << '\n' << cfg.canonical();
    res.files.push_back(cpath);
  }
  switch (cfg.kind) {
    case ExperimentKind::pool: return run_pool(cfg, opt, res);
    case ExperimentKind::sweep:
    case ExperimentKind::nonstationary:
    case ExperimentKind::off_on: return run_sweep_like(cfg, opt, res);
    case ExperimentKind::dose_response: return run_dose_response(cfg, opt, res);
    case ExperimentKind::coevolve: return run_coevolve(cfg, opt, res);
    case ExperimentKind::random_control: return run_random_control(cfg, opt, res);
    case ExperimentKind::report: return run_report(cfg, opt, res);
  }
  return res;
}

// ------------------------------------------------------------------ report

namespace {

struct Group {
  std::string spec;
  Mode mode;
  std::vector<std::string> networks;
  std::vector<const EvalRecord*> recs;
};

bool params_less(const PlasticityParams& a, const PlasticityParams& b) {
  return a.eta != b.eta ? a.eta < b.eta : a.lambda < b.lambda;
}

SweepGrid grid_of(const std::vector<const EvalRecord*>& recs) {
  std::vector<PlasticityParams> pts;
  for (const auto* r : recs) pts.push_back(r->params);
  std::sort(pts.begin(), pts.end(), params_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  SweepGrid g;
  g.name = "records";
  g.points = pts;
  return g;
}

std::vector<Group> group_records(const std::vector<EvalRecord>& records) {
  std::map<std::pair<std::string, int>, Group> m;
  for (const auto& r : records) {
    if (r.mode == Mode::baseline) continue;
    auto& g = m[{r.spec, static_cast<int>(r.mode)}];
    g.spec = r.spec;
    g.mode = r.mode;
    g.recs.push_back(&r);
  }
  std::vector<Group> out;
  for (auto& [k, g] : m) {
    std::set<std::string> ids;
    for (const auto* r : g.recs) ids.insert(r->network_id);
    g.networks.assign(ids.begin(), ids.end());
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<std::vector<double>> submatrix(const DeltaMatrix& m, const std::vector<std::size_t>& rows) {
  std::vector<std::vector<double>> out;
  for (std::size_t i : rows) out.push_back(m.delta[i]);
  return out;
}

}  // namespace

ReportTables build_report(const std::vector<EvalRecord>& records, const std::vector<EvalRecord>& ns_records) {
  ReportTables t;
  std::map<std::string, const EvalRecord*> baseline;  // id|spec
  for (const auto& r : records) {
    if (r.mode == Mode::baseline) baseline[r.network_id + "|" + r.spec] = &r;
  }
  for (const auto& r : ns_records) {
    if (r.mode == Mode::baseline) baseline.try_emplace(r.network_id + "|" + r.spec, &r);
  }

  // Non-stationary oracle per network, keyed by static descriptor.
  std::map<std::string, std::map<std::string, std::pair<double, PlasticityParams>>> ns_oracle;
  for (const auto& g : group_records(ns_records)) {
    if (!EnvSpec::from_descriptor(g.spec).perturbation) continue;
    const SweepGrid grid = grid_of(g.recs);
    const DeltaMatrix m = delta_matrix(ns_records, g.networks, EnvSpec::from_descriptor(g.spec), grid, g.mode);
    const OracleRegret o = oracle_and_regret(m);
    for (std::size_t i = 0; i < g.networks.size(); ++i) {
      ns_oracle[static_descriptor(g.spec)][g.networks[i]] = {o.oracle_delta[i], grid.points[o.oracle_point[i]]};
    }
  }

  for (const auto& g : group_records(records)) {
    const EnvSpec spec = EnvSpec::from_descriptor(g.spec);
    const std::string sdesc = static_of(spec).descriptor();
    const SweepGrid grid = grid_of(g.recs);
    const DeltaMatrix m = delta_matrix(records, g.networks, spec, grid, g.mode);
    std::map<std::string, const EvalRecord*> rec_at;
    for (const auto* r : g.recs) rec_at[r->key()] = r;

    std::vector<std::string> missing;
    std::map<Stratum, std::vector<std::size_t>> by_stratum;
    for (std::size_t i = 0; i < g.networks.size(); ++i) {
      auto it = baseline.find(g.networks[i] + "|" + sdesc);
      if (it == baseline.end()) {
        missing.push_back(g.networks[i] + "|" + sdesc + "|0|0|baseline");
        continue;
      }
      by_stratum[stratify(it->second->mean_reward, spec.kind)].push_back(i);
    }
    if (!missing.empty()) {
      std::string msg = "report: missing static baselines:";
      for (const auto& k : missing) msg += " " + k;
      throw std::invalid_argument(msg);
    }

    std::vector<StratumRow> group_rows;
    for (const auto& [stratum, rows] : by_stratum) {
      DeltaMatrix sub;
      sub.points = m.points;
      sub.delta = submatrix(m, rows);
      for (std::size_t i : rows) sub.networks.push_back(m.networks[i]);
      const OracleRegret o = oracle_and_regret(sub);
      StratumRow row;
      row.spec = g.spec;
      row.mode = to_string(g.mode);
      row.stratum = stratum;
      row.n = rows.size();
      row.oracle_delta = o.oracle_mean;
      row.pct_improved = static_cast<double>(std::count_if(o.oracle_delta.begin(), o.oracle_delta.end(),
                                                           [](double d) { return d > 0.0; })) /
                         static_cast<double>(rows.size());
      row.best_fixed = sub.points[o.best_fixed_point];
      row.best_fixed_delta = o.best_fixed_mean;
      row.regret = o.regret;
      std::vector<double> at_best;
      for (const auto& r : sub.delta) at_best.push_back(r[o.best_fixed_point]);
      row.harm_rate_best_fixed = harm_rate(at_best);
      const auto ah = anti_vs_hebbian(sub);
      row.cohens_d = ah.d;
      if (!ah.mann_whitney.undefined) row.mw_p = ah.mann_whitney.p;

      // Headroom, split-half, dw ratio: need the same-spec baseline.
      std::vector<double> head, ratios;
      EpisodeDeltas ep;
      bool episodes_ok = true;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::string& id = sub.networks[k];
        auto b = baseline.find(id + "|" + g.spec);
        if (b == baseline.end()) {
          episodes_ok = false;
          continue;
        }
        if (auto h = headroom_fraction(b->second->mean_reward, o.oracle_delta[k], max_episode_reward(spec.kind))) {
          head.push_back(*h);
        }
        std::vector<std::vector<double>> per_point;
        for (const auto& p : sub.points) {
          EvalRecord probe;
          probe.network_id = id;
          probe.spec = g.spec;
          probe.params = p;
          probe.mode = g.mode;
          const EvalRecord* r = rec_at.at(probe.key());
          std::vector<double> d;
          for (std::size_t e = 0; e < r->rewards.size() && e < b->second->rewards.size(); ++e) {
            d.push_back(r->rewards[e] - b->second->rewards[e]);
          }
          if (d.size() < 2) episodes_ok = false;
          per_point.push_back(std::move(d));
          if (p == sub.points[o.oracle_point[k]] && spec.perturbation) {
            if (auto q = weight_change_ratio(r->dw_pre, r->dw_post)) ratios.push_back(*q);
          }
        }
        ep.push_back(std::move(per_point));
      }
      if (!head.empty()) row.headroom = stats::mean(head);
      if (!ratios.empty()) row.dw_ratio = stats::mean(ratios);
      if (episodes_ok && !ep.empty()) row.split_half_retained = split_half_validation(ep, sub.points).retained;

      // Variance explained by eta and by lambda.
      std::map<double, std::vector<double>> by_eta, by_lambda;
      for (const auto& r : sub.delta) {
        for (std::size_t p = 0; p < sub.points.size(); ++p) {
          by_eta[sub.points[p].eta].push_back(r[p]);
          by_lambda[sub.points[p].lambda].push_back(r[p]);
        }
      }
      auto eps2 = [](const std::map<double, std::vector<double>>& gm) -> std::optional<double> {
        if (gm.size() < 2) return std::nullopt;
        std::vector<std::vector<double>> groups;
        for (const auto& [k, v] : gm) groups.push_back(v);
        return stats::kruskal_wallis_eps2(groups).eps2;
      };
      row.eps2_eta = eps2(by_eta);
      row.eps2_lambda = eps2(by_lambda);

      if (!spec.perturbation && ns_oracle.count(sdesc)) {
        const auto& nso = ns_oracle.at(sdesc);
        std::size_t helped = 0, counted = 0;
        std::vector<double> prem;
        for (std::size_t k = 0; k < rows.size(); ++k) {
          auto it = nso.find(sub.networks[k]);
          if (it == nso.end()) continue;
          ++counted;
          helped += it->second.first > 0.0;
          for (std::size_t p = 0; p < sub.points.size(); ++p) {
            if (sub.points[p] == it->second.second) prem.push_back(adaptation_premium(it->second.first, sub.delta[k][p]));
          }
        }
        if (counted) row.ns_pct_helped = static_cast<double>(helped) / static_cast<double>(counted);
        if (!prem.empty()) row.premium = stats::mean(prem);
      }

      for (std::size_t p = 0; p < sub.points.size(); ++p) {
        double s = 0.0;
        for (const auto& r : sub.delta) s += r[p];
        t.heatmap.push_back(g.spec + "," + row.mode + "," + to_string(stratum) + "," + fmt_double(sub.points[p].eta) +
                            "," + fmt_double(sub.points[p].lambda) + "," + std::to_string(rows.size()) + "," +
                            fmt_double(s / static_cast<double>(rows.size())));
      }

      if (spec.kind == EnvKind::acrobot) {
        std::vector<std::optional<int>> base_solved, oracle_solved;
        for (std::size_t k = 0; k < rows.size(); ++k) {
          const std::string& id = sub.networks[k];
          auto b = baseline.find(id + "|" + g.spec);
          if (b == baseline.end()) continue;
          EvalRecord probe;
          probe.network_id = id;
          probe.spec = g.spec;
          probe.params = sub.points[o.oracle_point[k]];
          probe.mode = g.mode;
          const EvalRecord* r = rec_at.at(probe.key());
          base_solved.insert(base_solved.end(), b->second->solved_steps.begin(), b->second->solved_steps.end());
          oracle_solved.insert(oracle_solved.end(), r->solved_steps.begin(), r->solved_steps.end());
        }
        std::vector<int> ts;
        for (int x = 0; x <= spec.max_steps; x += 10) ts.push_back(x);
        const auto ub = unsolved_fraction(base_solved, ts), uo = unsolved_fraction(oracle_solved, ts);
        for (std::size_t i = 0; i < ts.size(); ++i) {
          t.survival.push_back(g.spec + "," + row.mode + "," + to_string(stratum) + "," + std::to_string(ts[i]) + "," +
                               fmt_double(ub[i]) + "," + fmt_double(uo[i]));
        }
      }
      group_rows.push_back(row);
    }
    for (auto& r : group_rows) {
      if (r.mw_p) r.mw_p_bonferroni = stats::bonferroni(*r.mw_p, group_rows.size());
      t.rows.push_back(r);
    }

    // Quintiles over every network in the group.
    std::vector<double> dw, eta;
    const OracleRegret all = oracle_and_regret(m);
    for (std::size_t i = 0; i < g.networks.size(); ++i) {
      std::vector<double> v;
      for (const auto& p : m.points) {
        EvalRecord probe;
        probe.network_id = g.networks[i];
        probe.spec = g.spec;
        probe.params = p;
        probe.mode = g.mode;
        const double x = rec_at.at(probe.key())->mean_abs_dw();
        if (std::isfinite(x)) v.push_back(x);
      }
      if (v.empty()) continue;
      dw.push_back(stats::mean(v));
      eta.push_back(m.points[all.oracle_point[i]].eta);
    }
    if (dw.size() >= 5) {
      const auto q = quintile_preference(dw, eta);
      for (int k = 0; k < 5; ++k) {
        t.quintiles.push_back(g.spec + "," + to_string(g.mode) + "," + std::to_string(k + 1) + "," +
                              std::to_string(dw.size()) + "," + opt_str(q[k]));
      }
    }
  }
  return t;
}

std::string table1_header() {
  return "spec,mode,stratum,n,oracle_delta_r,pct_improved,best_eta,best_lambda,best_fixed_delta_r,regret,"
         "regret_undefined,harm_rate_best_fixed,cohens_d,mw_p,mw_p_bonferroni,headroom_fraction,split_half_retained,"
         "eps2_eta,eps2_lambda,dw_ratio,ns_pct_helped,adaptation_premium";
}

std::string table1_row(const StratumRow& r) {
  return r.spec + "," + r.mode + "," + to_string(r.stratum) + "," + std::to_string(r.n) + "," +
         fmt_double(r.oracle_delta) + "," + fmt_double(r.pct_improved) + "," + fmt_double(r.best_fixed.eta) + "," +
         fmt_double(r.best_fixed.lambda) + "," + fmt_double(r.best_fixed_delta) + "," + opt_str(r.regret) + "," +
         (r.regret ? "false" : "true") + "," + fmt_double(r.harm_rate_best_fixed) + "," + opt_str(r.cohens_d) + "," +
         opt_str(r.mw_p) + "," + opt_str(r.mw_p_bonferroni) + "," + opt_str(r.headroom) + "," + opt_str(r.split_half_retained) + "," +
         opt_str(r.eps2_eta) + "," + opt_str(r.eps2_lambda) + "," + opt_str(r.dw_ratio) + "," + opt_str(r.ns_pct_helped) + "," +
         opt_str(r.premium);
}

std::string table2_header() { return "spec,mode,stratum,n,pct_improved,cohens_d,mw_p,ns_pct_helped"; }

std::string table2_row(const StratumRow& r) {
  return r.spec + "," + r.mode + "," + to_string(r.stratum) + "," + std::to_string(r.n) + "," +
         fmt_double(r.pct_improved) + "," + opt_str(r.cohens_d) + "," + opt_str(r.mw_p) + "," + opt_str(r.ns_pct_helped);
}

GARunLog ga_log_from_jsonl(const std::string& path) {
  const auto f = read_jsonl(path);
  GARunLog log;
  if (f.header.contains("seed")) log.config.seed = f.header.at("seed").get<std::uint64_t>();
  auto get_opt = [](const json& j, const char* k) -> std::optional<double> {
    if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
    return j.at(k).get<double>();
  };
  for (const auto& l : f.lines) {
    if (l.contains("complete")) {
      log.evaluations = l.value("evaluations", std::size_t{0});
      log.developments = l.value("developments", std::size_t{0});
      continue;
    }
    GenerationLog g;
    g.generation = l.at("generation").get<int>();
    g.best_fitness = l.at("best_fitness").get<double>();
    g.mean_fitness = l.at("mean_fitness").get<double>();
    g.best_eta = get_opt(l, "best_eta");
    g.best_lambda = get_opt(l, "best_lambda");
    g.mean_eta = get_opt(l, "mean_eta");
    g.best_neurons = l.at("best_neurons").get<std::size_t>();
    g.best_connections = l.at("best_connections").get<std::size_t>();
    g.evaluations = l.at("evaluations").get<std::size_t>();
    g.best_genome = genome_from_csv_row(l.at("best_genome").get<std::string>());
    log.generations.push_back(std::move(g));
  }
  if (log.generations.empty()) throw std::runtime_error(path + " holds no generations");
  return log;
}

}  // namespace morphoplast
