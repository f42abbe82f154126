#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphoplast/evaluation.hpp"
#include "morphoplast/stats.hpp"

namespace morphoplast {

struct SweepGrid {
  std::string name;
  std::vector<double> etas;     // ascending
  std::vector<double> lambdas;  // ascending
  // eta-major: points[i * lambdas.size() + j] = (etas[i], lambdas[j]).
  std::vector<PlasticityParams> points;
};

// primary75, extended248, coarse22, micro248_acrobot. Throws
// std::invalid_argument for anything else.
SweepGrid build_grid(std::string_view name);
std::vector<std::string> grid_names();

// Runs every (network, grid point) evaluation in parallel. `sink` receives
// each finished record (serialised by the caller's appender; it is invoked
// under an internal lock). Keys already in `skip` are not evaluated.
// Baselines go through `cache` and are delivered to the sink once per
// network with mode baseline.
struct SweepTask {
  const DevelopedNetwork* net = nullptr;
  EnvSpec spec;
  PlasticityParams params;
  Mode mode = Mode::plastic;
};
using RecordSink = std::function<void(const EvalRecord&)>;
std::size_t run_evaluations(const std::vector<SweepTask>& tasks, const std::vector<std::uint64_t>& seeds,
                            std::size_t workers, BaselineCache& cache, const RecordSink& sink,
                            const std::function<bool(const std::string&)>& skip = {});

std::vector<SweepTask> sweep_tasks(const std::vector<DevelopedNetwork>& nets, const EnvSpec& spec,
                                   const SweepGrid& grid, Mode mode);

// Delta-r matrix of networks x grid points.
struct DeltaMatrix {
  std::vector<std::string> networks;
  std::vector<PlasticityParams> points;
  std::vector<std::vector<double>> delta;  // [network][point]
};

// Gathers delta_r for every (network, point) from `records` restricted to
// `spec` and `mode`. Throws std::invalid_argument listing the missing keys.
DeltaMatrix delta_matrix(const std::vector<EvalRecord>& records, const std::vector<std::string>& networks,
                         const EnvSpec& spec, const SweepGrid& grid, Mode mode);

struct OracleRegret {
  std::vector<std::size_t> oracle_point;  // per network
  std::vector<double> oracle_delta;       // per network
  double oracle_mean = 0.0;               // O
  std::size_t best_fixed_point = 0;
  double best_fixed_mean = 0.0;           // F
  std::optional<double> regret;           // nullopt when O <= 0
};

// Per-network argmax (ties: smaller |eta|, then smaller lambda, then lower
// index); F = max over points of the across-network mean, same tie rule;
// regret = clamp(1 - max(0, F) / O, 0, 1). Throws on an empty matrix or
// ragged rows.
OracleRegret oracle_and_regret(const DeltaMatrix& m);

// Index of the preferred maximum of `values` over `points` under the tie rule.
std::size_t preferred_argmax(const std::vector<double>& values, const std::vector<PlasticityParams>& points);

// Per-episode deltas: [network][point][episode] = plastic - baseline reward.
using EpisodeDeltas = std::vector<std::vector<std::vector<double>>>;

struct SplitHalf {
  std::optional<double> retained;  // even-episode mean / full-data O; nullopt when O <= 0
  double selected_even_mean = 0.0;
  double full_oracle_mean = 0.0;
};

// Oracle chosen on odd-indexed episodes (1, 3, ...), evaluated on the even
// ones (0, 2, ...). Throws with fewer than two episodes.
SplitHalf split_half_validation(const EpisodeDeltas& d, const std::vector<PlasticityParams>& points);

double harm_rate(const std::vector<double>& deltas);
// delta / 500.
double normalised_delta(double delta);
// delta / (max_reward - baseline); nullopt when baseline > max_reward - 1.
std::optional<double> headroom_fraction(double baseline, double delta, double max_reward = 500.0);
double adaptation_premium(double nonstationary_delta, double static_delta);

// mean over episodes of post-switch |dw| divided by the same mean pre-switch.
// NaN entries are skipped. nullopt when no finite pre value exists or the
// pre mean is zero.
std::optional<double> weight_change_ratio(const std::vector<double>& pre, const std::vector<double>& post);

// Fraction of networks with oracle eta < 0 per |dw| quintile. Boundaries are
// the 20/40/60/80th percentiles; values equal to a boundary go to the lower
// bucket. Empty buckets are nullopt. Throws with fewer than 5 networks.
std::array<std::optional<double>, 5> quintile_preference(const std::vector<double>& mean_abs_dw,
                                                         const std::vector<double>& oracle_eta);

// Fraction of episodes with no solved step or a solved step > t, per t.
std::vector<double> unsolved_fraction(const std::vector<std::optional<int>>& solved_steps,
                                      const std::vector<int>& t_grid);

struct DoseResponse {
  std::vector<int> switch_times;
  std::vector<int> durations;      // max_steps - switch time
  std::vector<double> mean_oracle_delta;
  std::optional<double> rho;       // Spearman of delta against duration
  bool ties = false;               // flagged when rho is undefined or ranks tie
  bool strictly_increasing = false;  // in duration order
};

// per_switch[k] holds the per-network oracle delta at switch_times[k].
DoseResponse dose_response(const std::vector<int>& switch_times,
                           const std::vector<std::vector<double>>& per_switch, int max_steps = 500);

// Pools of delta over every (network, point) with eta < 0 vs eta > 0.
struct SignPools {
  std::vector<double> anti;
  std::vector<double> hebbian;
};
SignPools sign_pools(const DeltaMatrix& m);

struct AntiVsHebbian {
  std::optional<double> d;
  stats::TestResult mann_whitney;
  std::size_t n_anti = 0;
  std::size_t n_hebbian = 0;
};
AntiVsHebbian anti_vs_hebbian(const DeltaMatrix& m);

}  // namespace morphoplast
