#include "morphoplast/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "morphoplast/rng.hpp"

namespace morphoplast {

namespace {

constexpr std::array<double, 4> kCartPoleScale = {2.4, 3.0, 0.2095, 3.0};
constexpr std::array<double, 6> kAcrobotScale = {1.0, 1.0, 1.0, 1.0, 4.0 * std::numbers::pi,
                                                 9.0 * std::numbers::pi};

bool change_matches(EnvKind k, Perturbation p) {
  if (k == EnvKind::cartpole) return p == Perturbation::pole_mass_x10 || p == Perturbation::gravity_x2;
  return p == Perturbation::link2_mass_x2;
}

double wrap_angle(double x) {
  const double lo = -std::numbers::pi, hi = std::numbers::pi;
  const double diff = hi - lo;
  while (x > hi) x -= diff;
  while (x < lo) x += diff;
  return x;
}

using State5 = std::array<double, 5>;

State5 acrobot_derivs(const State5& sa, const AcrobotPhysics& p) {
  const double m1 = p.mass1, m2 = p.mass2, l1 = p.length1;
  const double lc1 = p.com1, lc2 = p.com2, i1 = p.inertia1, i2 = p.inertia2, g = p.gravity;
  const double a = sa[4];
  const double theta1 = sa[0], theta2 = sa[1], dtheta1 = sa[2], dtheta2 = sa[3];
  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(theta2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - std::numbers::pi / 2.0);
  const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
                      2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - std::numbers::pi / 2.0) + phi2;
  const double ddtheta2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
                          (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
  return {dtheta1, dtheta2, ddtheta1, ddtheta2, 0.0};
}

State5 axpy(const State5& y, double h, const State5& k) {
  State5 out;
  for (std::size_t i = 0; i < 5; ++i) out[i] = y[i] + h * k[i];
  return out;
}

}  // namespace

std::string to_string(EnvKind k) { return k == EnvKind::cartpole ? "cartpole" : "acrobot"; }

std::string to_string(Perturbation p) {
  switch (p) {
    case Perturbation::pole_mass_x10: return "pole_mass_x10";
    case Perturbation::gravity_x2: return "gravity_x2";
    case Perturbation::link2_mass_x2: return "link2_mass_x2";
  }
  return "?";
}

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "cartpole") return EnvKind::cartpole;
  if (s == "acrobot") return EnvKind::acrobot;
  throw std::invalid_argument("unknown environment '" + s + "'");
}

Perturbation perturbation_from_string(const std::string& s) {
  if (s == "pole_mass_x10") return Perturbation::pole_mass_x10;
  if (s == "gravity_x2") return Perturbation::gravity_x2;
  if (s == "link2_mass_x2") return Perturbation::link2_mass_x2;
  throw std::invalid_argument("unknown perturbation '" + s + "'");
}

std::string EnvSpec::descriptor() const {
  std::string d = to_string(kind);
  if (max_steps != 500) d += "#" + std::to_string(max_steps);
  if (perturbation) d += "+" + to_string(perturbation->change) + "@" + std::to_string(perturbation->switch_step);
  return d;
}

EnvSpec EnvSpec::from_descriptor(const std::string& d) {
  EnvSpec spec;
  std::string rest = d;
  std::string pert;
  if (auto plus = rest.find('+'); plus != std::string::npos) {
    pert = rest.substr(plus + 1);
    rest = rest.substr(0, plus);
  }
  if (auto hash = rest.find('#'); hash != std::string::npos) {
    spec.max_steps = std::stoi(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  spec.kind = env_kind_from_string(rest);
  if (!pert.empty()) {
    const auto at = pert.find('@');
    if (at == std::string::npos) throw std::invalid_argument("bad env descriptor '" + d + "'");
    return make_nonstationary(spec, perturbation_from_string(pert.substr(0, at)), std::stoi(pert.substr(at + 1)));
  }
  return spec;
}

EnvSpec cartpole_spec() { return EnvSpec{EnvKind::cartpole, 500, std::nullopt}; }
EnvSpec acrobot_spec() { return EnvSpec{EnvKind::acrobot, 500, std::nullopt}; }

EnvSpec make_nonstationary(const EnvSpec& spec, Perturbation change, int switch_step) {
  if (!change_matches(spec.kind, change)) {
    throw std::invalid_argument("perturbation " + to_string(change) + " does not apply to " + to_string(spec.kind));
  }
  if (switch_step < 1 || switch_step > spec.max_steps) {
    throw std::invalid_argument("switch step must lie in [1, max_steps]");
  }
  EnvSpec out = spec;
  out.perturbation = PerturbationSpec{switch_step, change};
  return out;
}

CartPolePhysics cartpole_physics_at(const EnvSpec& spec, int steps_taken) {
  CartPolePhysics p;
  if (spec.perturbation && steps_taken >= spec.perturbation->switch_step) {
    if (spec.perturbation->change == Perturbation::pole_mass_x10) p.mass_pole = 1.0;
    if (spec.perturbation->change == Perturbation::gravity_x2) p.gravity = 20.0;
  }
  return p;
}

AcrobotPhysics acrobot_physics_at(const EnvSpec& spec, int steps_taken) {
  AcrobotPhysics p;
  if (spec.perturbation && steps_taken >= spec.perturbation->switch_step &&
      spec.perturbation->change == Perturbation::link2_mass_x2) {
    p.mass2 = 2.0;
  }
  return p;
}

std::size_t observation_size(EnvKind k) { return k == EnvKind::cartpole ? 4 : 6; }
std::size_t action_count(EnvKind k) { return k == EnvKind::cartpole ? 2 : 3; }

std::span<const double> observation_scaling(EnvKind k) {
  if (k == EnvKind::cartpole) return kCartPoleScale;
  return kAcrobotScale;
}

double min_episode_reward(EnvKind k) { return k == EnvKind::cartpole ? 1.0 : -500.0; }
double max_episode_reward(EnvKind k) { return k == EnvKind::cartpole ? 500.0 : -1.0; }

Observation observe(const EnvState& st) {
  Observation o{};
  if (st.kind == EnvKind::cartpole) {
    std::copy(st.s.begin(), st.s.end(), o.begin());
  } else {
    o = {std::cos(st.s[0]), std::sin(st.s[0]), std::cos(st.s[1]), std::sin(st.s[1]), st.s[2], st.s[3]};
  }
  return o;
}

EnvState env_reset(const EnvSpec& spec, std::uint64_t seed) {
  EnvState st;
  st.kind = spec.kind;
  const double bound = spec.kind == EnvKind::cartpole ? 0.05 : 0.1;
  for (std::size_t k = 0; k < 4; ++k) {
    st.s[k] = -bound + 2.0 * bound * u64_to_unit(counter_u64(seed, k));
  }
  return st;
}

std::array<double, 4> cartpole_transition(const std::array<double, 4>& s, std::size_t action,
                                          const CartPolePhysics& p) {
  const auto [x, x_dot, theta, theta_dot] = s;
  const double total_mass = p.mass_pole + p.mass_cart;
  const double polemass_length = p.mass_pole * p.half_length;
  const double force = action == 1 ? p.force_mag : -p.force_mag;
  const double costheta = std::cos(theta);
  const double sintheta = std::sin(theta);
  const double temp = (force + polemass_length * theta_dot * theta_dot * sintheta) / total_mass;
  const double thetaacc = (p.gravity * sintheta - costheta * temp) /
                          (p.half_length * (4.0 / 3.0 - p.mass_pole * costheta * costheta / total_mass));
  const double xacc = temp - polemass_length * thetaacc * costheta / total_mass;
  return {x + p.dt * x_dot, x_dot + p.dt * xacc, theta + p.dt * theta_dot, theta_dot + p.dt * thetaacc};
}

std::array<double, 4> acrobot_transition(const std::array<double, 4>& s, std::size_t action,
                                         const AcrobotPhysics& p) {
  static constexpr std::array<double, 3> kTorque = {-1.0, 0.0, 1.0};
  const State5 y0 = {s[0], s[1], s[2], s[3], kTorque[action]};
  const double dt = p.dt;
  const double dt2 = dt / 2.0;
  const State5 k1 = acrobot_derivs(y0, p);
  const State5 k2 = acrobot_derivs(axpy(y0, dt2, k1), p);
  const State5 k3 = acrobot_derivs(axpy(y0, dt2, k2), p);
  const State5 k4 = acrobot_derivs(axpy(y0, dt, k3), p);
  std::array<double, 4> ns;
  for (std::size_t i = 0; i < 4; ++i) {
    ns[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  ns[0] = wrap_angle(ns[0]);
  ns[1] = wrap_angle(ns[1]);
  ns[2] = std::clamp(ns[2], -kAcrobotMaxVel1, kAcrobotMaxVel1);
  ns[3] = std::clamp(ns[3], -kAcrobotMaxVel2, kAcrobotMaxVel2);
  return ns;
}

StepResult env_step(EnvState& st, const EnvSpec& spec, std::size_t action) {
  if (st.terminal) throw std::logic_error("env_step called on a terminal state");
  if (action >= action_count(spec.kind)) throw std::invalid_argument("action out of range");
  StepResult r;
  if (spec.kind == EnvKind::cartpole) {
    st.s = cartpole_transition(st.s, action, cartpole_physics_at(spec, st.steps));
    ++st.steps;
    const bool failed = st.s[0] < -kCartPoleXLimit || st.s[0] > kCartPoleXLimit ||
                        st.s[2] < -kCartPoleThetaLimit || st.s[2] > kCartPoleThetaLimit;
    r.reward = 1.0;
    st.terminal = failed || st.steps >= spec.max_steps;
  } else {
    st.s = acrobot_transition(st.s, action, acrobot_physics_at(spec, st.steps));
    ++st.steps;
    const bool goal = -std::cos(st.s[0]) - std::cos(st.s[1] + st.s[0]) > 1.0;
    if (goal) st.solved_step = st.steps;
    r.reward = -1.0;
    st.terminal = goal || st.steps >= spec.max_steps;
  }
  r.terminal = st.terminal;
  r.observation = observe(st);
  return r;
}

}  // namespace morphoplast
