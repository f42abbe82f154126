#pragma once

#include <cstddef>
#include <cstdint>

#include "morphoplast/network.hpp"

namespace morphoplast {

inline constexpr double kControlWeightLo = 0.01;
inline constexpr double kControlWeightHi = 1.0;

struct ControlOptions {
  // true: the control keeps the source's input/hidden/output counts.
  // false: only totals match; each role is drawn uniformly.
  bool match_roles = true;
};

// Random directed RNN with the source's neuron and connection counts.
// Neurons sit on distinct random cells of the source grid; connections are
// distinct ordered pairs (self-loops allowed) with weights uniform on
// [0.01, 1]. Deterministic in (source hash, replicate, seed). Throws
// std::invalid_argument when the source has no neurons or more connections
// than n^2.
DevelopedNetwork generate_matched_rnn(const DevelopedNetwork& source, std::uint64_t replicate,
                                      std::uint64_t seed, const ControlOptions& opt = {});

}  // namespace morphoplast
