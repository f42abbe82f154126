#include "morphoplast/sweep_analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace morphoplast {

namespace {

std::vector<double> symmetric(const std::vector<double>& magnitudes) {
  std::vector<double> out;
  for (double m : magnitudes) {
    out.push_back(m);
    out.push_back(-m);
  }
  out.push_back(0.0);
  std::sort(out.begin(), out.end());
  return out;
}

SweepGrid product(std::string name, std::vector<double> etas, std::vector<double> lambdas) {
  SweepGrid g{std::move(name), std::move(etas), std::move(lambdas), {}};
  for (double e : g.etas) {
    for (double l : g.lambdas) g.points.push_back({e, l});
  }
  return g;
}

const std::vector<double> kExtendedLambdas = {0.0, 1e-5, 1e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1};

// a preferred over b at equal value
bool gentler(const PlasticityParams& a, const PlasticityParams& b) {
  if (std::fabs(a.eta) != std::fabs(b.eta)) return std::fabs(a.eta) < std::fabs(b.eta);
  return a.lambda < b.lambda;
}

double mean_of(const std::vector<double>& v) { return stats::mean(v); }

}  // namespace

SweepGrid build_grid(std::string_view name) {
  if (name == "primary75") {
    return product("primary75", symmetric({0.0005, 0.001, 0.005, 0.01, 0.02, 0.03, 0.05}),
                   {0.0, 1e-5, 1e-4, 1e-3, 1e-2});
  }
  if (name == "extended248") {
    return product("extended248",
                   symmetric({0.0005, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.075, 0.1, 0.15, 0.2, 0.25,
                              0.3, 0.4, 0.5}),
                   kExtendedLambdas);
  }
  if (name == "coarse22") {
    std::vector<double> etas = {-0.075, -0.05, -0.04, -0.03, -0.02, -0.015, -0.01, -0.005, -0.002, -0.001, -0.0005};
    return product("coarse22", etas, {1e-3, 1e-2});
  }
  if (name == "micro248_acrobot") {
    std::vector<double> mags;
    const double lo = 5e-5, hi = 0.1;
    for (int k = 0; k < 15; ++k) mags.push_back(lo * std::pow(hi / lo, k / 14.0));
    mags.back() = hi;
    return product("micro248_acrobot", symmetric(mags), kExtendedLambdas);
  }
  throw std::invalid_argument("unknown sweep grid '" + std::string(name) + "'");
}

std::vector<std::string> grid_names() { return {"primary75", "extended248", "coarse22", "micro248_acrobot"}; }

std::vector<SweepTask> sweep_tasks(const std::vector<DevelopedNetwork>& nets, const EnvSpec& spec,
                                   const SweepGrid& grid, Mode mode) {
  std::vector<SweepTask> tasks;
  tasks.reserve(nets.size() * grid.points.size());
  for (const auto& n : nets) {
    for (const auto& p : grid.points) tasks.push_back({&n, spec, p, mode});
  }
  return tasks;
}

std::size_t run_evaluations(const std::vector<SweepTask>& tasks, const std::vector<std::uint64_t>& seeds,
                            std::size_t workers, BaselineCache& cache, const RecordSink& sink,
                            const std::function<bool(const std::string&)>& skip) {
  auto key_of = [](const std::string& id, const EnvSpec& spec, const PlasticityParams& p, Mode mode) {
    EvalRecord r;
    r.network_id = id;
    r.spec = spec.descriptor();
    r.params = mode == Mode::baseline ? PlasticityParams{} : p;
    r.mode = mode;
    return r.key();
  };

  std::vector<std::optional<EvalRecord>> done(tasks.size());
  std::vector<std::uint8_t> finished(tasks.size(), 0);
  std::size_t next_flush = 0;
  std::set<std::string> baseline_emitted;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> evaluated{0};

  // Emits in task order so the output does not depend on scheduling.
  auto flush = [&]() {
    while (next_flush < tasks.size() && finished[next_flush]) {
      const SweepTask& t = tasks[next_flush];
      const std::string id = t.net->id();
      const std::string bkey = key_of(id, t.spec, {}, Mode::baseline);
      if (!baseline_emitted.count(bkey)) {
        baseline_emitted.insert(bkey);
        if (!(skip && skip(bkey))) {
          if (auto b = cache.find(BaselineCache::make_key(id, t.spec, seeds))) {
            if (sink) sink(*b);
          }
        }
      }
      if (done[next_flush] && done[next_flush]->mode != Mode::baseline && sink) sink(*done[next_flush]);
      done[next_flush].reset();
      ++next_flush;
    }
  };

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const SweepTask& t = tasks[i];
      const std::string id = t.net->id();
      const std::string bkey = key_of(id, t.spec, {}, Mode::baseline);
      const std::string key = key_of(id, t.spec, t.params, t.mode);
      std::optional<EvalRecord> rec;
      const bool need_baseline = !(skip && skip(bkey));
      const bool need_task = !(skip && skip(key)) && t.mode != Mode::baseline;
      if (need_task) {
        rec = evaluate_network(*t.net, t.spec, t.params, t.mode, seeds, &cache);
        ++evaluated;
      } else if (need_baseline) {
        evaluate_baseline(*t.net, t.spec, seeds, &cache);
      }
      std::lock_guard lock(mu);
      done[i] = std::move(rec);
      finished[i] = 1;
      flush();
    }
  };

  // Baselines are counted by cache growth, which is race free.
  const std::size_t cached_before = cache.size();
  workers = std::max<std::size_t>(1, workers);
  if (workers == 1 || tasks.size() < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, tasks.size()); ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return evaluated.load() + (cache.size() - cached_before);
}

DeltaMatrix delta_matrix(const std::vector<EvalRecord>& records, const std::vector<std::string>& networks,
                         const EnvSpec& spec, const SweepGrid& grid, Mode mode) {
  const std::string sd = spec.descriptor();
  std::map<std::string, const EvalRecord*> by_key;
  for (const auto& r : records) {
    if (r.spec == sd && r.mode == mode) by_key[r.key()] = &r;
  }
  DeltaMatrix m;
  m.networks = networks;
  m.points = grid.points;
  std::vector<std::string> missing;
  for (const auto& id : networks) {
    std::vector<double> row;
    row.reserve(grid.points.size());
    for (const auto& p : grid.points) {
      EvalRecord probe;
      probe.network_id = id;
      probe.spec = sd;
      probe.params = p;
      probe.mode = mode;
      auto it = by_key.find(probe.key());
      if (it == by_key.end()) {
        missing.push_back(probe.key());
        row.push_back(0.0);
      } else {
        row.push_back(it->second->delta_r);
      }
    }
    m.delta.push_back(std::move(row));
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " missing records:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw std::invalid_argument(msg);
  }
  return m;
}

std::size_t preferred_argmax(const std::vector<double>& values, const std::vector<PlasticityParams>& points) {
  if (values.empty() || values.size() != points.size()) throw std::invalid_argument("preferred_argmax: bad sizes");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best] || (values[i] == values[best] && gentler(points[i], points[best]))) best = i;
  }
  return best;
}

OracleRegret oracle_and_regret(const DeltaMatrix& m) {
  if (m.delta.empty() || m.points.empty()) throw std::invalid_argument("oracle_and_regret: empty matrix");
  for (const auto& row : m.delta) {
    if (row.size() != m.points.size()) throw std::invalid_argument("oracle_and_regret: ragged matrix");
  }
  OracleRegret r;
  for (const auto& row : m.delta) {
    const std::size_t k = preferred_argmax(row, m.points);
    r.oracle_point.push_back(k);
    r.oracle_delta.push_back(row[k]);
  }
  r.oracle_mean = mean_of(r.oracle_delta);
  std::vector<double> col_means(m.points.size(), 0.0);
  for (std::size_t p = 0; p < m.points.size(); ++p) {
    double s = 0.0;
    for (const auto& row : m.delta) s += row[p];
    col_means[p] = s / static_cast<double>(m.delta.size());
  }
  r.best_fixed_point = preferred_argmax(col_means, m.points);
  r.best_fixed_mean = col_means[r.best_fixed_point];
  if (r.oracle_mean > 0.0) {
    r.regret = std::clamp(1.0 - std::max(0.0, r.best_fixed_mean) / r.oracle_mean, 0.0, 1.0);
  }
  return r;
}

SplitHalf split_half_validation(const EpisodeDeltas& d, const std::vector<PlasticityParams>& points) {
  if (d.empty()) throw std::invalid_argument("split_half_validation: no networks");
  SplitHalf out;
  std::vector<double> selected_even, full_oracle;
  for (const auto& net : d) {
    if (net.size() != points.size()) throw std::invalid_argument("split_half_validation: ragged input");
    std::vector<double> odd_means, even_means, all_means;
    for (const auto& eps : net) {
      if (eps.size() < 2) throw std::invalid_argument("split_half_validation needs at least two episodes");
      double so = 0.0, se = 0.0;
      std::size_t no = 0, ne = 0;
      for (std::size_t i = 0; i < eps.size(); ++i) {
        if (i % 2 == 1) {
          so += eps[i];
          ++no;
        } else {
          se += eps[i];
          ++ne;
        }
      }
      odd_means.push_back(so / static_cast<double>(no));
      even_means.push_back(se / static_cast<double>(ne));
      all_means.push_back(mean_of(eps));
    }
    selected_even.push_back(even_means[preferred_argmax(odd_means, points)]);
    full_oracle.push_back(all_means[preferred_argmax(all_means, points)]);
  }
  out.selected_even_mean = mean_of(selected_even);
  out.full_oracle_mean = mean_of(full_oracle);
  if (out.full_oracle_mean > 0.0) out.retained = out.selected_even_mean / out.full_oracle_mean;
  return out;
}

double harm_rate(const std::vector<double>& deltas) {
  if (deltas.empty()) return 0.0;
  const auto harmed = std::count_if(deltas.begin(), deltas.end(), [](double v) { return v < 0.0; });
  return static_cast<double>(harmed) / static_cast<double>(deltas.size());
}

double normalised_delta(double delta) { return delta / 500.0; }

std::optional<double> headroom_fraction(double baseline, double delta, double max_reward) {
  if (baseline > max_reward - 1.0) return std::nullopt;
  return delta / (max_reward - baseline);
}

double adaptation_premium(double nonstationary_delta, double static_delta) {
  return nonstationary_delta - static_delta;
}

std::optional<double> weight_change_ratio(const std::vector<double>& pre, const std::vector<double>& post) {
  auto finite_mean = [](const std::vector<double>& v) -> std::optional<double> {
    double s = 0.0;
    std::size_t n = 0;
    for (double x : v) {
      if (std::isfinite(x)) {
        s += x;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
  };
  const auto a = finite_mean(pre), b = finite_mean(post);
  if (!a || !b || *a == 0.0) return std::nullopt;
  return *b / *a;
}

std::array<std::optional<double>, 5> quintile_preference(const std::vector<double>& mean_abs_dw,
                                                         const std::vector<double>& oracle_eta) {
  if (mean_abs_dw.size() != oracle_eta.size()) throw std::invalid_argument("quintile_preference: size mismatch");
  if (mean_abs_dw.size() < 5) throw std::invalid_argument("quintile_preference needs at least 5 networks");
  std::array<double, 4> bounds{};
  for (int k = 0; k < 4; ++k) bounds[k] = stats::percentile(mean_abs_dw, 20.0 * (k + 1));
  std::array<std::size_t, 5> total{}, anti{};
  for (std::size_t i = 0; i < mean_abs_dw.size(); ++i) {
    std::size_t b = 0;
    while (b < 4 && mean_abs_dw[i] > bounds[b]) ++b;
    ++total[b];
    if (oracle_eta[i] < 0.0) ++anti[b];
  }
  std::array<std::optional<double>, 5> out;
  for (int b = 0; b < 5; ++b) {
    if (total[b]) out[b] = static_cast<double>(anti[b]) / static_cast<double>(total[b]);
  }
  return out;
}

std::vector<double> unsolved_fraction(const std::vector<std::optional<int>>& solved_steps,
                                      const std::vector<int>& t_grid) {
  std::vector<double> out;
  for (int t : t_grid) {
    if (solved_steps.empty()) {
      out.push_back(1.0);
      continue;
    }
    const auto open = std::count_if(solved_steps.begin(), solved_steps.end(),
                                    [t](const std::optional<int>& s) { return !s || *s > t; });
    out.push_back(static_cast<double>(open) / static_cast<double>(solved_steps.size()));
  }
  return out;
}

DoseResponse dose_response(const std::vector<int>& switch_times, const std::vector<std::vector<double>>& per_switch,
                           int max_steps) {
  if (switch_times.size() != per_switch.size()) throw std::invalid_argument("dose_response: size mismatch");
  DoseResponse r;
  std::vector<std::size_t> order(switch_times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // ascending duration
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return switch_times[a] > switch_times[b]; });
  for (std::size_t i : order) {
    r.switch_times.push_back(switch_times[i]);
    r.durations.push_back(max_steps - switch_times[i]);
    r.mean_oracle_delta.push_back(mean_of(per_switch[i]));
  }
  if (r.durations.size() >= 2) {
    std::vector<double> dur(r.durations.begin(), r.durations.end());
    r.rho = stats::spearman_rho(dur, r.mean_oracle_delta);
    std::vector<double> sorted = r.mean_oracle_delta;
    std::sort(sorted.begin(), sorted.end());
    r.ties = !r.rho || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    if (!r.rho) r.rho = 0.0;
    r.strictly_increasing = true;
    for (std::size_t i = 1; i < r.mean_oracle_delta.size(); ++i) {
      if (!(r.mean_oracle_delta[i] > r.mean_oracle_delta[i - 1])) r.strictly_increasing = false;
    }
  }
  return r;
}

SignPools sign_pools(const DeltaMatrix& m) {
  SignPools s;
  for (const auto& row : m.delta) {
    for (std::size_t p = 0; p < m.points.size(); ++p) {
      if (m.points[p].eta < 0.0) s.anti.push_back(row[p]);
      if (m.points[p].eta > 0.0) s.hebbian.push_back(row[p]);
    }
  }
  return s;
}

AntiVsHebbian anti_vs_hebbian(const DeltaMatrix& m) {
  const SignPools s = sign_pools(m);
  AntiVsHebbian out;
  out.n_anti = s.anti.size();
  out.n_hebbian = s.hebbian.size();
  if (s.anti.empty() || s.hebbian.empty()) {
    out.mann_whitney.undefined = true;
    return out;
  }
  out.d = stats::cohens_d(s.anti, s.hebbian);
  out.mann_whitney = stats::mann_whitney_u(s.anti, s.hebbian);
  return out;
}

}  // namespace morphoplast
