#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace morphoplast {

enum class EnvKind { cartpole, acrobot };
enum class Perturbation { pole_mass_x10, gravity_x2, link2_mass_x2 };

std::string to_string(EnvKind k);
std::string to_string(Perturbation p);
EnvKind env_kind_from_string(const std::string& s);
Perturbation perturbation_from_string(const std::string& s);

struct PerturbationSpec {
  int switch_step = 200;
  Perturbation change = Perturbation::pole_mass_x10;
  bool operator==(const PerturbationSpec&) const = default;
};

struct EnvSpec {
  EnvKind kind = EnvKind::cartpole;
  int max_steps = 500;
  std::optional<PerturbationSpec> perturbation;

  // "cartpole", "cartpole+gravity_x2@200", "acrobot+link2_mass_x2@50".
  std::string descriptor() const;
  static EnvSpec from_descriptor(const std::string& d);
  bool operator==(const EnvSpec&) const = default;
};

EnvSpec cartpole_spec();
EnvSpec acrobot_spec();

// Throws std::invalid_argument if the change does not belong to spec.kind or
// switch_step is outside [1, max_steps].
EnvSpec make_nonstationary(const EnvSpec& spec, Perturbation change, int switch_step);

struct CartPolePhysics {
  double gravity = 9.8;
  double mass_cart = 1.0;
  double mass_pole = 0.1;
  double half_length = 0.5;
  double force_mag = 10.0;
  double dt = 0.02;
};

struct AcrobotPhysics {
  double mass1 = 1.0, mass2 = 1.0;
  double length1 = 1.0, length2 = 1.0;
  double com1 = 0.5, com2 = 0.5;
  double inertia1 = 1.0, inertia2 = 1.0;
  double gravity = 9.8;
  double dt = 0.2;
};

inline constexpr double kCartPoleXLimit = 2.4;
// 12 degrees, as in the reference implementation.
inline constexpr double kCartPoleThetaLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
inline constexpr double kAcrobotMaxVel1 = 4.0 * 3.14159265358979323846;
inline constexpr double kAcrobotMaxVel2 = 9.0 * 3.14159265358979323846;

// Physics in force for the transition taken when `steps_taken` steps have
// already completed: perturbed iff steps_taken >= switch_step.
CartPolePhysics cartpole_physics_at(const EnvSpec& spec, int steps_taken);
AcrobotPhysics acrobot_physics_at(const EnvSpec& spec, int steps_taken);

std::size_t observation_size(EnvKind k);  // 4 / 6
std::size_t action_count(EnvKind k);      // 2 / 3
// Divisors mapping nominal observation ranges near [-1, 1].
std::span<const double> observation_scaling(EnvKind k);
double min_episode_reward(EnvKind k);  // 1 / -500
double max_episode_reward(EnvKind k);  // 500 / -1

struct EnvState {
  EnvKind kind = EnvKind::cartpole;
  // cartpole: x, x_dot, theta, theta_dot; acrobot: theta1, theta2, dtheta1, dtheta2
  std::array<double, 4> s{};
  int steps = 0;
  bool terminal = false;
  std::optional<int> solved_step;  // acrobot: step on which the goal held
};

using Observation = std::array<double, 6>;  // first observation_size(kind) used

Observation observe(const EnvState& st);

// Counter-based initial draw: component k = lo + (hi - lo) * unit(counter_u64(seed, k)),
// bounds +-0.05 (cartpole) or +-0.1 (acrobot).
EnvState env_reset(const EnvSpec& spec, std::uint64_t seed);

struct StepResult {
  Observation observation{};
  double reward = 0.0;
  bool terminal = false;
};

// Throws std::logic_error when the state is already terminal.
StepResult env_step(EnvState& st, const EnvSpec& spec, std::size_t action);

// Pure dynamics, without bookkeeping. Exposed for the oracle tests.
std::array<double, 4> cartpole_transition(const std::array<double, 4>& s, std::size_t action,
                                          const CartPolePhysics& p);
std::array<double, 4> acrobot_transition(const std::array<double, 4>& s, std::size_t action,
                                         const AcrobotPhysics& p);

}  // namespace morphoplast
