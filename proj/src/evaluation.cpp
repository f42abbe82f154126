#include "morphoplast/evaluation.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace morphoplast {

namespace {

std::string exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

bool plastic_at(Mode mode, const EnvSpec& spec, int steps_taken) {
  if (mode == Mode::plastic) return true;
  if (mode == Mode::off_on) return spec.perturbation && steps_taken >= spec.perturbation->switch_step;
  return false;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::baseline: return "baseline";
    case Mode::plastic: return "plastic";
    case Mode::off_on: return "off_on";
  }
  return "?";
}

Mode mode_from_string(std::string_view s) {
  if (s == "baseline") return Mode::baseline;
  if (s == "plastic") return Mode::plastic;
  if (s == "off_on") return Mode::off_on;
  throw std::invalid_argument("unknown evaluation mode '" + std::string(s) + "'");
}

std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> s(20);
  std::iota(s.begin(), s.end(), std::uint64_t{42});
  return s;
}

EpisodeResult run_episode(PlasticNetwork& net, const EnvSpec& spec, const PlasticityParams& params,
                          Mode mode, std::uint64_t seed) {
  EpisodeResult res;
  net.reset();
  EnvState st = env_reset(spec, seed);
  Observation obs = observe(st);
  const auto scaling = observation_scaling(spec.kind);
  const std::size_t n_obs = observation_size(spec.kind);
  const int switch_step = spec.perturbation ? spec.perturbation->switch_step : spec.max_steps + 1;
  double pre_sum = 0.0, post_sum = 0.0;
  while (!st.terminal) {
    const std::size_t action = net.forward_step(std::span<const double>(obs.data(), n_obs), scaling);
    if (plastic_at(mode, spec, st.steps)) {
      const double dw = net.apply_plasticity(params);
      if (!std::isfinite(dw)) {
        res.degenerate = true;
        break;
      }
      if (st.steps < switch_step) {
        pre_sum += dw;
        ++res.plastic_steps_pre;
      } else {
        post_sum += dw;
        ++res.plastic_steps_post;
      }
    }
    const StepResult r = env_step(st, spec, action);
    res.reward += r.reward;
    obs = r.observation;
  }
  res.solved_step = st.solved_step;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  res.dw_pre = res.plastic_steps_pre ? pre_sum / res.plastic_steps_pre : nan;
  res.dw_post = res.plastic_steps_post ? post_sum / res.plastic_steps_post : nan;
  return res;
}

EpisodeResult run_episode(const DevelopedNetwork& net, const EnvSpec& spec,
                          const PlasticityParams& params, Mode mode, std::uint64_t seed) {
  if (!net.functional_for(observation_size(spec.kind), action_count(spec.kind))) {
    EpisodeResult res;
    res.reward = min_episode_reward(spec.kind);
    res.non_functional = true;
    res.dw_pre = res.dw_post = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  PlasticNetwork pn(net, observation_size(spec.kind), action_count(spec.kind));
  return run_episode(pn, spec, params, mode, seed);
}

std::string EvalRecord::key() const {
  return network_id + "|" + spec + "|" + exact(params.eta) + "|" + exact(params.lambda) + "|" +
         to_string(mode);
}

double EvalRecord::mean_abs_dw() const {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < dw_pre.size(); ++i) {
    for (double v : {dw_pre[i], i < dw_post.size() ? dw_post[i] : std::nan("")}) {
      if (std::isfinite(v)) {
        sum += v;
        ++n;
      }
    }
  }
  return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

std::optional<EvalRecord> BaselineCache::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

EvalRecord BaselineCache::insert(const std::string& key, const EvalRecord& rec) {
  std::lock_guard lock(mu_);
  return map_.try_emplace(key, rec).first->second;
}

std::size_t BaselineCache::size() const {
  std::lock_guard lock(mu_);
  return map_.size();
}

std::vector<EvalRecord> BaselineCache::records() const {
  std::lock_guard lock(mu_);
  std::vector<EvalRecord> out;
  out.reserve(map_.size());
  for (const auto& [k, v] : map_) out.push_back(v);
  return out;
}

std::string BaselineCache::make_key(const std::string& network_id, const EnvSpec& spec,
                                    const std::vector<std::uint64_t>& seeds) {
  std::string k = network_id + "|" + spec.descriptor() + "|";
  const bool standard = seeds == default_seeds();
  if (standard) return k + "42-61";
  for (std::size_t i = 0; i < seeds.size(); ++i) k += (i ? "," : "") + std::to_string(seeds[i]);
  return k;
}

namespace {

EvalRecord run_all(const DevelopedNetwork& net, const EnvSpec& spec, const PlasticityParams& params,
                   Mode mode, const std::vector<std::uint64_t>& seeds) {
  EvalRecord rec;
  rec.network_id = net.id();
  rec.spec = spec.descriptor();
  rec.params = mode == Mode::baseline ? PlasticityParams{} : params;
  rec.mode = mode;
  const bool functional = net.functional_for(observation_size(spec.kind), action_count(spec.kind));
  rec.non_functional = !functional;
  std::optional<PlasticNetwork> pn;
  if (functional) pn.emplace(net, observation_size(spec.kind), action_count(spec.kind));
  for (const std::uint64_t seed : seeds) {
    EpisodeResult ep;
    if (functional) {
      ep = run_episode(*pn, spec, params, mode, seed);
    } else {
      ep.reward = min_episode_reward(spec.kind);
      ep.dw_pre = ep.dw_post = std::numeric_limits<double>::quiet_NaN();
    }
    rec.rewards.push_back(ep.reward);
    rec.dw_pre.push_back(ep.dw_pre);
    rec.dw_post.push_back(ep.dw_post);
    rec.solved_steps.push_back(ep.solved_step);
    rec.degenerate_episodes += ep.degenerate;
  }
  rec.mean_reward = mean(rec.rewards);
  return rec;
}

}  // namespace

EvalRecord evaluate_baseline(const DevelopedNetwork& net, const EnvSpec& spec,
                             const std::vector<std::uint64_t>& seeds, BaselineCache* cache) {
  if (seeds.empty()) throw std::invalid_argument("evaluation needs at least one seed");
  std::string key;
  if (cache) {
    key = BaselineCache::make_key(net.id(), spec, seeds);
    if (auto hit = cache->find(key)) return *hit;
  }
  EvalRecord rec = run_all(net, spec, {}, Mode::baseline, seeds);
  if (cache) return cache->insert(key, rec);
  return rec;
}

EvalRecord evaluate_network(const DevelopedNetwork& net, const EnvSpec& spec,
                            const PlasticityParams& params, Mode mode,
                            const std::vector<std::uint64_t>& seeds, BaselineCache* cache) {
  const EvalRecord base = evaluate_baseline(net, spec, seeds, cache);
  if (mode == Mode::baseline) return base;
  EvalRecord rec = run_all(net, spec, params, mode, seeds);
  rec.delta_r = rec.mean_reward - base.mean_reward;
  return rec;
}

std::string to_string(Stratum s) {
  switch (s) {
    case Stratum::Weak: return "Weak";
    case Stratum::LowMid: return "LowMid";
    case Stratum::HighMid: return "HighMid";
    case Stratum::NearPerfect: return "NearPerfect";
    case Stratum::Perfect: return "Perfect";
  }
  return "?";
}

Stratum stratum_from_string(std::string_view s) {
  for (Stratum st : kAllStrata) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown stratum '" + std::string(s) + "'");
}

StratumThresholds cartpole_thresholds() { return {200.0, 350.0, 450.0, 475.0}; }
StratumThresholds acrobot_thresholds() { return {-350.0, -200.0, -120.0, -100.0}; }
StratumThresholds default_thresholds(EnvKind k) {
  return k == EnvKind::cartpole ? cartpole_thresholds() : acrobot_thresholds();
}

Stratum stratify(double r, const StratumThresholds& t) {
  if (r >= t.perfect) return Stratum::Perfect;
  if (r >= t.near_perfect) return Stratum::NearPerfect;
  if (r >= t.high_mid) return Stratum::HighMid;
  if (r >= t.low_mid) return Stratum::LowMid;
  return Stratum::Weak;  // includes NaN
}

Stratum stratify(double r, EnvKind k) { return stratify(r, default_thresholds(k)); }

}  // namespace morphoplast
