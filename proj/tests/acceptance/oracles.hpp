#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Written from the textbook formulations rather than from the
// library code, so agreement is a real check.

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace oracle {

using State = std::array<double, 4>;

// Cart-pole: solves the 2x2 Lagrangian system for the accelerations, then
// takes one explicit Euler step of 0.02 s.
State cartpole_step(const State& s, std::size_t action, double gravity = 9.8, double pole_mass = 0.1);

// Acrobot: mass-matrix form solved by Cramer's rule, one classical RK4 step
// of 0.2 s, angle wrap into [-pi, pi], velocity clamps.
State acrobot_step(const State& s, std::size_t action, double link2_mass = 1.0);

struct RegretResult {
  double oracle_mean = 0.0;
  double best_fixed_mean = 0.0;
  std::optional<double> regret;
};

// delta[network][point], plain loops.
RegretResult brute_regret(const std::vector<std::vector<double>>& delta);

// w + eta * pre * post - lambda * w.
double plastic_weight(double w, double pre, double post, double eta, double lambda);

}  // namespace oracle
