#include "morphoplast/plastic_network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "morphoplast/simd/kernels.hpp"

namespace morphoplast {

PlasticNetwork::PlasticNetwork(const DevelopedNetwork& net, std::size_t n_obs, std::size_t n_actions) {
  if (!net.functional_for(n_obs, n_actions)) {
    throw std::invalid_argument("network is not functional for this environment");
  }
  const std::size_t n = net.neurons.size();
  clamped_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Role r = net.neurons[i].role;
    if (r == Role::input && inputs_.size() < n_obs) {
      inputs_.push_back(i);
      clamped_[i] = 1;
    } else if (r == Role::output && outputs_.size() < n_actions) {
      outputs_.push_back(i);
    }
  }

  const std::size_t m = net.connections.size();
  order_.resize(m);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = net.connections[a];
    const auto& cb = net.connections[b];
    return std::pair(ca.dst, ca.src) < std::pair(cb.dst, cb.src);
  });
  pre_.resize(m);
  post_.resize(m);
  w0_.resize(m);
  in_begin_.assign(n + 1, 0);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& c = net.connections[order_[k]];
    pre_[k] = c.src;
    post_[k] = c.dst;
    w0_[k] = c.weight;
    ++in_begin_[static_cast<std::size_t>(c.dst) + 1];
  }
  for (std::size_t j = 0; j < n; ++j) in_begin_[j + 1] += in_begin_[j];
  x_.assign(n, 0.0);
  next_.assign(n, 0.0);
  reset();
}

void PlasticNetwork::reset() {
  std::fill(x_.begin(), x_.end(), 0.0);
  w_ = w0_;
  telemetry_.clear();
}

std::size_t PlasticNetwork::forward_step(std::span<const double> observation,
                                         std::span<const double> scaling) {
  for (std::size_t k = 0; k < inputs_.size(); ++k) x_[inputs_[k]] = observation[k] / scaling[k];
  const std::size_t n = x_.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (clamped_[j]) {
      next_[j] = x_[j];
      continue;
    }
    double s = 0.0;
    for (std::size_t k = in_begin_[j]; k < in_begin_[j + 1]; ++k) s += w_[k] * x_[pre_[k]];
    next_[j] = std::tanh(s);
  }
  x_.swap(next_);

  std::size_t action = 0;
  for (std::size_t a = 1; a < outputs_.size(); ++a) {
    if (x_[outputs_[a]] > x_[outputs_[action]]) action = a;
  }
  return action;
}

double PlasticNetwork::apply_plasticity(const PlasticityParams& params) {
  double mean = 0.0;
  if (!w_.empty()) {
    const double sum = simd::kernels().hebbian(w_.data(), pre_.data(), post_.data(), x_.data(),
                                               w_.size(), params.eta, params.lambda);
    mean = sum / static_cast<double>(w_.size());
  }
  telemetry_.push_back(mean);
  return mean;
}

std::vector<double> PlasticNetwork::live_weights() const {
  std::vector<double> out(w_.size());
  for (std::size_t k = 0; k < w_.size(); ++k) out[order_[k]] = w_[k];
  return out;
}

void PlasticNetwork::set_activations(std::span<const double> x) {
  if (x.size() != x_.size()) throw std::invalid_argument("activation vector size mismatch");
  std::copy(x.begin(), x.end(), x_.begin());
}

}  // namespace morphoplast
