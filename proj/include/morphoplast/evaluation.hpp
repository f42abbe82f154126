#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphoplast/environments.hpp"
#include "morphoplast/network.hpp"
#include "morphoplast/plastic_network.hpp"

namespace morphoplast {

enum class Mode { baseline, plastic, off_on };

std::string to_string(Mode m);
Mode mode_from_string(std::string_view s);

// Episode seeds 42..61.
std::vector<std::uint64_t> default_seeds();

struct EpisodeResult {
  double reward = 0.0;
  std::optional<int> solved_step;
  // Mean per-step |dw| before / after the switch step (NaN when no plastic
  // step fell in that phase).
  double dw_pre = 0.0;
  double dw_post = 0.0;
  int plastic_steps_pre = 0;
  int plastic_steps_post = 0;
  bool degenerate = false;
  bool non_functional = false;
};

// Runs one episode on an already compiled network. Plasticity applies after
// each forward step iff mode == plastic, or mode == off_on and the steps
// taken so far have reached the switch step.
EpisodeResult run_episode(PlasticNetwork& net, const EnvSpec& spec, const PlasticityParams& params,
                          Mode mode, std::uint64_t seed);
// Convenience overload; a non-functional network scores the minimum reward.
EpisodeResult run_episode(const DevelopedNetwork& net, const EnvSpec& spec,
                          const PlasticityParams& params, Mode mode, std::uint64_t seed);

struct EvalRecord {
  std::string network_id;
  std::string spec;  // EnvSpec::descriptor()
  PlasticityParams params;
  Mode mode = Mode::baseline;
  std::vector<double> rewards;
  double mean_reward = 0.0;
  double delta_r = 0.0;
  std::vector<double> dw_pre;   // per episode
  std::vector<double> dw_post;  // per episode
  std::vector<std::optional<int>> solved_steps;
  bool non_functional = false;
  int degenerate_episodes = 0;

  // (network id, spec, eta, lambda, mode) with exact decimal params.
  std::string key() const;
  // Mean over episodes of the pre+post per-step |dw| (NaN if never plastic).
  double mean_abs_dw() const;
};

// Baseline records per (network id, spec, seeds). Insert-if-absent under a
// mutex; concurrent writers compute identical values so the first one wins.
class BaselineCache {
 public:
  std::optional<EvalRecord> find(const std::string& key) const;
  // Returns the stored record (the existing one when already present).
  EvalRecord insert(const std::string& key, const EvalRecord& rec);
  std::size_t size() const;
  std::vector<EvalRecord> records() const;

  static std::string make_key(const std::string& network_id, const EnvSpec& spec,
                              const std::vector<std::uint64_t>& seeds);

 private:
  mutable std::mutex mu_;
  std::map<std::string, EvalRecord> map_;
};

// Evaluates over `seeds`, filling delta_r against the baseline on the same
// spec and seeds (computed once and cached when `cache` is given).
EvalRecord evaluate_network(const DevelopedNetwork& net, const EnvSpec& spec,
                            const PlasticityParams& params, Mode mode,
                            const std::vector<std::uint64_t>& seeds = default_seeds(),
                            BaselineCache* cache = nullptr);

// Baseline record alone (mode baseline, delta_r 0).
EvalRecord evaluate_baseline(const DevelopedNetwork& net, const EnvSpec& spec,
                             const std::vector<std::uint64_t>& seeds = default_seeds(),
                             BaselineCache* cache = nullptr);

enum class Stratum { Weak, LowMid, HighMid, NearPerfect, Perfect };

std::string to_string(Stratum s);
Stratum stratum_from_string(std::string_view s);
inline constexpr std::array<Stratum, 5> kAllStrata = {Stratum::Weak, Stratum::LowMid, Stratum::HighMid,
                                                      Stratum::NearPerfect, Stratum::Perfect};

// Left-inclusive boundaries between consecutive strata.
struct StratumThresholds {
  double low_mid;
  double high_mid;
  double near_perfect;
  double perfect;
};

StratumThresholds cartpole_thresholds();  // 200 / 350 / 450 / 475
StratumThresholds acrobot_thresholds();   // -350 / -200 / -120 / -100
StratumThresholds default_thresholds(EnvKind k);

Stratum stratify(double baseline_mean, const StratumThresholds& t);
Stratum stratify(double baseline_mean, EnvKind k);

}  // namespace morphoplast
