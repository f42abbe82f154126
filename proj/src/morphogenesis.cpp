#include "morphoplast/morphogenesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace morphoplast {

GridState::GridState(std::size_t w, std::size_t h)
    : width(w), height(h), cells(w * h, CellState::empty), roles(w * h, Role::hidden),
      born_iteration(w * h, -1) {
  for (auto& c : conc) c.assign(w * h, 0.0);
}

std::size_t GridState::neuron_count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), CellState::neuron));
}

double GridState::total(std::size_t morphogen) const {
  double s = 0.0;
  for (double v : conc[morphogen]) s += v;
  return s;
}

double init_weight(double c, double d) { return std::max(0.01, c / (1.0 + d)); }

double toroidal_distance(std::size_t width, std::size_t height, std::size_t a, std::size_t b) {
  const auto ax = static_cast<long>(a % width), ay = static_cast<long>(a / width);
  const auto bx = static_cast<long>(b % width), by = static_cast<long>(b / width);
  long dx = std::labs(ax - bx);
  long dy = std::labs(ay - by);
  dx = std::min(dx, static_cast<long>(width) - dx);
  dy = std::min(dy, static_cast<long>(height) - dy);
  return std::sqrt(static_cast<double>(dx * dx + dy * dy));
}

DevelopmentRules DevelopmentRules::from_genome(const Genome& g) {
  DevelopmentRules r;
  double rho = 0.0, tau = 0.0, beta = 0.0;
  for (std::size_t m = 0; m < kMorphogens; ++m) {
    const MorphogenView v = g.morphogen(m);
    r.s_prog[m] = v[Locus::s_prog];
    r.s_diff[m] = v[Locus::s_diff];
    r.d_x[m] = v[Locus::d_x];
    r.d_y[m] = v[Locus::d_y];
    r.inhibit_decay.gamma[m] = v[Locus::gamma];
    r.inhibit_decay.chi[m][(m + 1) % kMorphogens] = v[Locus::chi_a];
    r.inhibit_decay.chi[m][(m + 2) % kMorphogens] = v[Locus::chi_b];
    r.th_div_lo[m] = v[Locus::th_div_lo];
    r.th_div_hi[m] = v[Locus::th_div_hi];
    r.th_diff[m] = v[Locus::th_diff];
    r.fate_w[static_cast<std::size_t>(Role::input)][m] = v[Locus::fate_w_in];
    r.fate_w[static_cast<std::size_t>(Role::hidden)][m] = v[Locus::fate_w_hid];
    r.fate_w[static_cast<std::size_t>(Role::output)][m] = v[Locus::fate_w_out];
    r.alpha[m] = v[Locus::alpha];
    r.c_coef[m] = v[Locus::c_coef];
    rho += v[Locus::rho];
    tau += v[Locus::tau];
    beta += v[Locus::beta];
  }
  r.radius = rho;
  r.min_score = tau;
  r.out_degree = static_cast<std::size_t>(std::max(1L, std::lround(beta)));
  return r;
}

Developer::Developer(const Genome& g, std::size_t width, std::size_t height)
    : rules_(DevelopmentRules::from_genome(g)), state_(width, height), scratch_(width * height) {
  if (width < 2 || height < 2) throw std::invalid_argument("development grid must be at least 2x2");
  state_.cells[state_.index(width / 2, height / 2)] = CellState::progenitor;
}

void Developer::secrete() {
  for (std::size_t i = 0; i < state_.size(); ++i) {
    const CellState c = state_.cells[i];
    if (c == CellState::empty) continue;
    const auto& rate = c == CellState::progenitor ? rules_.s_prog : rules_.s_diff;
    for (std::size_t m = 0; m < kMorphogens; ++m) state_.conc[m][i] += rate[m];
  }
}

void Developer::diffuse() {
  const auto& k = simd::kernels();
  for (std::size_t m = 0; m < kMorphogens; ++m) {
    k.diffuse(state_.conc[m].data(), scratch_.data(), state_.width, state_.height, rules_.d_x[m],
              rules_.d_y[m]);
    state_.conc[m].swap(scratch_);
  }
}

void Developer::inhibit_and_decay() {
  simd::kernels().inhibit_decay(state_.conc[0].data(), state_.conc[1].data(),
                                state_.conc[2].data(), state_.size(), rules_.inhibit_decay);
}

void Developer::cell_fate() {
  const std::size_t w = state_.width, h = state_.height;
  std::vector<std::size_t> progenitors;
  for (std::size_t i = 0; i < state_.size(); ++i) {
    if (state_.cells[i] == CellState::progenitor) progenitors.push_back(i);
  }
  if (progenitors.empty()) return;
  auto local_total = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t m = 0; m < kMorphogens; ++m) s += state_.conc[m][i];
    return s;
  };
  // Grid statistics for the fate contrast, taken once per iteration.
  std::array<double, kMorphogens> gmean{}, grange{};
  for (std::size_t m = 0; m < kMorphogens; ++m) {
    const auto [lo, hi] = std::minmax_element(state_.conc[m].begin(), state_.conc[m].end());
    grange[m] = *hi - *lo;
    gmean[m] = state_.total(m) / static_cast<double>(state_.size());
  }

  for (const std::size_t i : progenitors) {
    std::array<double, kMorphogens> c{};
    for (std::size_t m = 0; m < kMorphogens; ++m) c[m] = state_.conc[m][i];

    bool wants_division = false;
    for (std::size_t m = 0; m < kMorphogens; ++m) {
      if (rules_.th_div_lo[m] <= c[m] && c[m] <= rules_.th_div_hi[m]) wants_division = true;
    }
    if (wants_division) {
      const std::size_t x = i % w, y = i / w;
      const std::array<std::size_t, 4> neighbours = {
          state_.index(x, (y + h - 1) % h),  // up
          state_.index((x + 1) % w, y),      // right
          state_.index(x, (y + 1) % h),      // down
          state_.index((x + w - 1) % w, y),  // left
      };
      std::size_t target = state_.size();
      double best = 0.0;
      for (const std::size_t n : neighbours) {
        if (state_.cells[n] != CellState::empty) continue;
        const double t = local_total(n);
        if (target == state_.size() || t < best) {
          target = n;
          best = t;
        }
      }
      if (target != state_.size()) {
        state_.cells[target] = CellState::progenitor;
        continue;
      }
    }

    // A progenitor that wanted to divide but had no room differentiates.
    bool wants_differentiation = wants_division;
    for (std::size_t m = 0; m < kMorphogens; ++m) {
      if (c[m] >= rules_.th_diff[m]) wants_differentiation = true;
    }
    if (!wants_differentiation) continue;

    std::array<double, kMorphogens> contrast{};
    for (std::size_t m = 0; m < kMorphogens; ++m) {
      contrast[m] = grange[m] > 0.0 ? (c[m] - gmean[m]) / grange[m] : 0.0;
    }
    std::array<int, 3> neighbour_roles{};
    const std::size_t x = i % w, y = i / w;
    for (std::size_t dy = 0; dy < 3; ++dy) {
      for (std::size_t dx = 0; dx < 3; ++dx) {
        if (dx == 1 && dy == 1) continue;
        const std::size_t n = state_.index((x + w + dx - 1) % w, (y + h + dy - 1) % h);
        if (state_.cells[n] == CellState::neuron) ++neighbour_roles[static_cast<std::size_t>(state_.roles[n])];
      }
    }

    Role role = Role::input;
    double best = -std::numeric_limits<double>::infinity();
    for (const Role r : {Role::input, Role::hidden, Role::output}) {
      const auto ri = static_cast<std::size_t>(r);
      double affinity = -kLateralInhibition * neighbour_roles[ri];
      for (std::size_t m = 0; m < kMorphogens; ++m) affinity += contrast[m] * rules_.fate_w[ri][m];
      if (affinity > best) {
        best = affinity;
        role = r;
      }
    }
    state_.cells[i] = CellState::neuron;
    state_.roles[i] = role;
    state_.born_iteration[i] = iteration_;
  }
}

bool may_project(Role src, Role dst) {
  switch (src) {
    case Role::input: return dst != Role::input;
    case Role::hidden: return dst != Role::input;
    case Role::output: return false;
  }
  return false;
}

void Developer::grow_axons() {
  const std::size_t n = state_.size();
  std::vector<std::size_t> neurons;
  for (std::size_t i = 0; i < n; ++i) {
    if (state_.cells[i] == CellState::neuron) neurons.push_back(i);
  }
  if (neurons.empty()) return;

  std::array<double, kMorphogens> max_c{};
  for (std::size_t m = 0; m < kMorphogens; ++m) {
    max_c[m] = *std::max_element(state_.conc[m].begin(), state_.conc[m].end());
  }

  // Attraction score and weight coefficient of every neuron as a target,
  // both on grid-max normalised concentrations.
  std::vector<double> score(n, 0.0), coeff(n, 0.0);
  for (const std::size_t q : neurons) {
    double s = 0.0, cc = 0.0;
    for (std::size_t m = 0; m < kMorphogens; ++m) {
      const double normalised = max_c[m] > 0.0 ? state_.conc[m][q] / max_c[m] : 0.0;
      s += rules_.alpha[m] * normalised;
      cc += rules_.c_coef[m] * normalised;
    }
    score[q] = s;
    coeff[q] = cc;
  }

  std::vector<std::pair<std::size_t, double>> candidates;  // (cell, distance)
  for (const std::size_t p : neurons) {
    const int age = iteration_ - state_.born_iteration[p];
    if (age % kAxonGrowthPeriod != 0) continue;
    candidates.clear();
    for (const std::size_t q : neurons) {
      if (q == p || !may_project(state_.roles[p], state_.roles[q])) continue;
      const double d = toroidal_distance(state_.width, state_.height, p, q);
      if (d <= rules_.radius && score[q] >= rules_.min_score) candidates.emplace_back(q, d);
    }
    const std::size_t k = std::min(rules_.out_degree, candidates.size());
    // Rank by distance-discounted attraction; the threshold above uses the raw score.
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<long>(k), candidates.end(),
                      [&](const auto& a, const auto& b) {
                        const double ea = score[a.first] / (1.0 + a.second);
                        const double eb = score[b.first] / (1.0 + b.second);
                        if (ea != eb) return ea > eb;
                        return a.first < b.first;
                      });
    for (std::size_t j = 0; j < k; ++j) {
      const auto [q, d] = candidates[j];
      state_.axons.try_emplace({static_cast<int>(p), static_cast<int>(q)}, init_weight(coeff[q], d));
    }
  }
}

void Developer::step() {
  ++iteration_;
  secrete();
  diffuse();
  inhibit_and_decay();
  for (std::size_t m = 0; m < kMorphogens; ++m) {
    for (double v : state_.conc[m]) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("non-finite morphogen " + std::to_string(m) +
                                 " concentration at development iteration " +
                                 std::to_string(iteration_));
      }
    }
  }
  cell_fate();
  grow_axons();
}

DevelopedNetwork Developer::network() const {
  DevelopedNetwork net;
  net.width = static_cast<int>(state_.width);
  net.height = static_cast<int>(state_.height);
  std::vector<int> neuron_of(state_.size(), -1);
  for (std::size_t i = 0; i < state_.size(); ++i) {
    if (state_.cells[i] != CellState::neuron) continue;
    neuron_of[i] = static_cast<int>(net.neurons.size());
    net.neurons.push_back({static_cast<int>(i % state_.width), static_cast<int>(i / state_.width),
                           state_.roles[i]});
  }
  net.connections.reserve(state_.axons.size());
  // Cell-index order equals neuron-index order, so map order is (src, dst) order.
  for (const auto& [key, w] : state_.axons) {
    net.connections.push_back({neuron_of[static_cast<std::size_t>(key.first)],
                               neuron_of[static_cast<std::size_t>(key.second)], w});
  }
  return net;
}

DevelopedNetwork develop(const Genome& g, std::size_t width, std::size_t height,
                         std::size_t iterations, const SnapshotSink& snapshot) {
  if (iterations < 1) throw std::invalid_argument("development needs at least one iteration");
  Developer dev(g, width, height);
  if (snapshot) snapshot(0, dev.state());
  for (std::size_t t = 0; t < iterations; ++t) {
    dev.step();
    if (snapshot) snapshot(dev.iteration(), dev.state());
  }
  return dev.network();
}

std::string snapshot_csv(int iteration, const GridState& s) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t m = 0; m < kMorphogens; ++m) {
    out << "# iteration " << iteration << " morphogen " << m << '\n';
    for (std::size_t y = 0; y < s.height; ++y) {
      for (std::size_t x = 0; x < s.width; ++x) {
        if (x) out << ',';
        out << s.conc[m][s.index(x, y)];
      }
      out << '\n';
    }
  }
  out << "# iteration " << iteration << " occupancy\n";
  for (std::size_t y = 0; y < s.height; ++y) {
    for (std::size_t x = 0; x < s.width; ++x) {
      if (x) out << ',';
      const std::size_t i = s.index(x, y);
      int code = 0;
      if (s.cells[i] == CellState::progenitor) code = 1;
      if (s.cells[i] == CellState::neuron) code = 2 + static_cast<int>(s.roles[i]);
      out << code;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace morphoplast
