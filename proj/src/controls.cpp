#include "morphoplast/controls.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "morphoplast/rng.hpp"

namespace morphoplast {

namespace {

// First k entries of a Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

DevelopedNetwork generate_matched_rnn(const DevelopedNetwork& source, std::uint64_t replicate,
                                      std::uint64_t seed, const ControlOptions& opt) {
  const std::size_t n = source.neurons.size();
  const std::size_t m = source.connections.size();
  if (n == 0) throw std::invalid_argument("control source has no neurons");
  if (m > n * n) throw std::invalid_argument("control needs more connections than ordered pairs");
  const std::size_t cells = static_cast<std::size_t>(source.width) * static_cast<std::size_t>(source.height);
  if (n > cells) throw std::invalid_argument("control source has more neurons than grid cells");

  Rng rng(derive_key(derive_key(seed, source.hash()), replicate));
  DevelopedNetwork out;
  out.width = source.width;
  out.height = source.height;
  out.origin = "random_control";

  auto positions = sample_distinct(cells, n, rng);
  std::sort(positions.begin(), positions.end());
  std::vector<Role> roles;
  if (opt.match_roles) {
    for (const auto& nr : source.neurons) roles.push_back(nr.role);
    for (std::size_t i = n; i > 1; --i) std::swap(roles[i - 1], roles[rng.below(i)]);
  } else {
    for (std::size_t i = 0; i < n; ++i) roles.push_back(static_cast<Role>(rng.below(3)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    Neuron nr;
    nr.x = static_cast<int>(positions[i] % static_cast<std::size_t>(source.width));
    nr.y = static_cast<int>(positions[i] / static_cast<std::size_t>(source.width));
    nr.role = roles[i];
    out.neurons.push_back(nr);
  }

  auto pairs = sample_distinct(n * n, m, rng);
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t p : pairs) {
    Connection c;
    c.src = static_cast<int>(p / n);
    c.dst = static_cast<int>(p % n);
    c.weight = rng.uniform(kControlWeightLo, kControlWeightHi);
    out.connections.push_back(c);
  }
  out.validate();
  return out;
}

}  // namespace morphoplast
