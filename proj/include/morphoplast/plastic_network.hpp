#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "morphoplast/network.hpp"

namespace morphoplast {

// Learning rate (sign selects Hebbian / anti-Hebbian, 0 disables) and decay.
struct PlasticityParams {
  double eta = 0.0;
  double lambda = 0.0;
  bool operator==(const PlasticityParams&) const = default;
  bool null() const { return eta == 0.0 && lambda == 0.0; }
};

// A DevelopedNetwork compiled for execution, with its mutable state
// (activations, live weights, |dw| telemetry).
//
// Propagation: the first n_obs input-role neurons (row-major) are clamped to
// the scaled observation; every other neuron then updates synchronously as
// x_j <- tanh(sum_i w_ij x_i), reading the freshly clamped inputs and the
// previous activations of everything else. The action is the argmax over the
// first n_actions output-role neurons (lowest index wins ties).
class PlasticNetwork {
 public:
  // Throws std::invalid_argument if the network lacks n_obs inputs or
  // n_actions outputs.
  PlasticNetwork(const DevelopedNetwork& net, std::size_t n_obs, std::size_t n_actions);

  // Zero activations, developmental weights, cleared telemetry.
  void reset();

  // `observation` and `scaling` have n_obs entries; inputs get obs / scaling.
  std::size_t forward_step(std::span<const double> observation, std::span<const double> scaling);

  // Hebbian update with decay on every connection using the current activations:
  //   w_ij += eta * x_i * x_j - lambda * w_ij
  // Returns the mean |dw| over connections (0 without connections) and
  // appends it to the telemetry. A non-finite return means the weights
  // diverged; callers abort the episode.
  double apply_plasticity(const PlasticityParams& params);

  std::span<const double> activations() const { return x_; }
  // Live weights in the DevelopedNetwork's connection order.
  std::vector<double> live_weights() const;
  std::span<const double> step_weight_deltas() const { return telemetry_; }

  // Testing hook: overwrite activations (size = neuron count).
  void set_activations(std::span<const double> x);

  std::size_t neuron_count() const { return x_.size(); }
  std::size_t connection_count() const { return w_.size(); }
  std::span<const std::size_t> input_neurons() const { return inputs_; }
  std::span<const std::size_t> output_neurons() const { return outputs_; }

 private:
  // Connections regrouped by destination for the weighted sums.
  std::vector<std::int32_t> pre_, post_;
  std::vector<double> w0_, w_;
  std::vector<std::size_t> order_;     // CSR slot -> DevelopedNetwork connection index
  std::vector<std::size_t> in_begin_;  // per neuron, CSR offsets (size n + 1)
  std::vector<std::size_t> inputs_, outputs_;
  std::vector<std::uint8_t> clamped_;
  std::vector<double> x_, next_;
  std::vector<double> telemetry_;
};

}  // namespace morphoplast
