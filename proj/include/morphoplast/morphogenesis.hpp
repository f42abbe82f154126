#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "morphoplast/genome.hpp"
#include "morphoplast/network.hpp"
#include "morphoplast/simd/kernels.hpp"

namespace morphoplast {

enum class CellState : std::uint8_t { empty, progenitor, neuron };

// Axons are grown on differentiation and every this many iterations after.
inline constexpr int kAxonGrowthPeriod = 10;
// Role-affinity penalty per neighbouring neuron (8-neighbourhood) already
// holding that role.
inline constexpr double kLateralInhibition = 0.5;

// Axon polarity: inputs and hidden neurons project to hidden and output
// neurons; outputs do not project. Self-connections are never grown.
bool may_project(Role src, Role dst);

struct GridState {
  std::size_t width = 0;
  std::size_t height = 0;
  std::array<std::vector<double>, kMorphogens> conc;  // row-major per morphogen
  std::vector<CellState> cells;
  std::vector<Role> roles;          // meaningful where cells == neuron
  std::vector<int> born_iteration;  // differentiation iteration, neurons only
  std::map<std::pair<int, int>, double> axons;  // (src cell, dst cell) -> weight

  GridState(std::size_t w, std::size_t h);
  std::size_t size() const { return width * height; }
  std::size_t index(std::size_t x, std::size_t y) const { return y * width + x; }
  std::size_t neuron_count() const;
  double total(std::size_t morphogen) const;
};

// w = max(0.01, c / (1 + d)).
double init_weight(double c, double d);

// Euclidean distance between two cells with wrap-around on both axes.
double toroidal_distance(std::size_t width, std::size_t height, std::size_t a, std::size_t b);

// Genome-derived constants, computed once per development.
struct DevelopmentRules {
  std::array<double, kMorphogens> s_prog{}, s_diff{}, d_x{}, d_y{};
  simd::InhibitDecayCoeffs inhibit_decay;
  std::array<double, kMorphogens> th_div_lo{}, th_div_hi{}, th_diff{};
  std::array<std::array<double, kMorphogens>, 3> fate_w{};  // [role][morphogen]
  std::array<double, kMorphogens> alpha{}, c_coef{};
  double radius = 0.0;       // sum of rho
  double min_score = 0.0;    // sum of tau
  std::size_t out_degree = 1;  // max(1, round(sum of beta))

  static DevelopmentRules from_genome(const Genome& g);
};

// Stepwise development. Each iteration runs, in order: secretion, diffusion,
// cross-inhibition, decay, cell fate, axon growth.
class Developer {
 public:
  // Seeds a single progenitor at (width/2, height/2). Throws
  // std::invalid_argument for width/height < 2.
  Developer(const Genome& g, std::size_t width, std::size_t height);

  // Throws std::runtime_error naming the iteration on non-finite concentration.
  void step();
  int iteration() const { return iteration_; }
  const GridState& state() const { return state_; }
  GridState& mutable_state() { return state_; }
  const DevelopmentRules& rules() const { return rules_; }

  // Individual sub-steps, exposed for property tests.
  void secrete();
  void diffuse();
  void inhibit_and_decay();
  void cell_fate();
  void grow_axons();

  DevelopedNetwork network() const;

 private:
  DevelopmentRules rules_;
  GridState state_;
  std::vector<double> scratch_;
  int iteration_ = 0;
};

using SnapshotSink = std::function<void(int iteration, const GridState&)>;

// Pure function of its inputs. Throws std::invalid_argument when width or
// height < 2 or iterations < 1.
DevelopedNetwork develop(const Genome& g, std::size_t width, std::size_t height,
                         std::size_t iterations, const SnapshotSink& snapshot = {});

// CSV grid dump of one iteration: a "morphogen m" block per field and an
// occupancy block (0 empty, 1 progenitor, 2 input, 3 hidden, 4 output).
std::string snapshot_csv(int iteration, const GridState& s);

}  // namespace morphoplast
