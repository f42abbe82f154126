#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace morphoplast {

inline constexpr std::size_t kMorphogens = 3;
inline constexpr std::size_t kGenesPerMorphogen = 18;
inline constexpr std::size_t kDevelopmentalGenes = kMorphogens * kGenesPerMorphogen;  // 54

// Locus order inside one morphogen's block of 18 scalars.
enum class Locus : std::size_t {
  s_prog = 0,   // progenitor secretion rate
  s_diff,       // differentiated-cell secretion rate
  gamma,        // decay rate
  d_x,          // diffusion along columns
  d_y,          // diffusion along rows
  chi_a,        // cross-inhibition onto morphogen (m+1)%3
  chi_b,        // cross-inhibition onto morphogen (m+2)%3
  th_div_lo,
  th_div_hi,
  th_diff,
  fate_w_in,
  fate_w_hid,
  fate_w_out,
  alpha,        // axon chemotactic attraction
  rho,          // connection-radius contribution
  c_coef,       // weight-init coefficient contribution
  beta,         // out-degree contribution
  tau,          // minimum target score contribution
};

struct GeneRange {
  double lo;
  double hi;
  double width() const { return hi - lo; }
};

GeneRange locus_range(Locus l);
std::string_view locus_name(Locus l);

// Range of developmental gene `index` in [0, 54).
GeneRange gene_range(std::size_t index);

struct PlasticityGenes {
  double eta = 0.0;
  double lambda = 0.0;
  bool operator==(const PlasticityGenes&) const = default;
};

struct PlasticityRange {
  GeneRange eta;
  GeneRange lambda;
  bool operator==(const PlasticityRange& o) const {
    return eta.lo == o.eta.lo && eta.hi == o.eta.hi && lambda.lo == o.lambda.lo &&
           lambda.hi == o.lambda.hi;
  }
};

PlasticityRange cartpole_plasticity_range();  // eta [-0.5, 0.5], lambda [0, 0.1]
PlasticityRange acrobot_plasticity_range();   // eta [-0.1, 0.1], lambda [0, 0.1]

// Read-only view of one morphogen's 18 genes.
class MorphogenView {
 public:
  explicit MorphogenView(std::span<const double, kGenesPerMorphogen> g) : g_(g) {}
  double operator[](Locus l) const { return g_[static_cast<std::size_t>(l)]; }

 private:
  std::span<const double, kGenesPerMorphogen> g_;
};

class Genome {
 public:
  Genome() { dev_.fill(0.0); }

  std::array<double, kDevelopmentalGenes>& developmental() { return dev_; }
  const std::array<double, kDevelopmentalGenes>& developmental() const { return dev_; }

  double& at(std::size_t morphogen, Locus l) {
    return dev_[morphogen * kGenesPerMorphogen + static_cast<std::size_t>(l)];
  }
  double at(std::size_t morphogen, Locus l) const {
    return dev_[morphogen * kGenesPerMorphogen + static_cast<std::size_t>(l)];
  }
  MorphogenView morphogen(std::size_t m) const {
    return MorphogenView(std::span<const double, kGenesPerMorphogen>(
        dev_.data() + m * kGenesPerMorphogen, kGenesPerMorphogen));
  }

  bool has_plasticity() const { return plasticity_.has_value(); }
  const std::optional<PlasticityGenes>& plasticity() const { return plasticity_; }
  const std::optional<PlasticityRange>& plasticity_range() const { return plasticity_range_; }
  void set_plasticity(PlasticityGenes genes, PlasticityRange range) {
    plasticity_ = genes;
    plasticity_range_ = range;
  }
  void clear_plasticity() {
    plasticity_.reset();
    plasticity_range_.reset();
  }

  // 54 or 56.
  std::size_t size() const { return kDevelopmentalGenes + (plasticity_ ? 2 : 0); }
  // Flat view: developmental genes, then eta, lambda.
  std::vector<double> flat() const;
  double flat_at(std::size_t i) const;
  GeneRange flat_range(std::size_t i) const;

  // All scalars inside their ranges and th_div_lo <= th_div_hi per morphogen.
  bool valid() const;

  // 64-bit content hash over the exact bit patterns of every scalar.
  std::uint64_t hash() const;

  bool operator==(const Genome& o) const {
    return dev_ == o.dev_ && plasticity_ == o.plasticity_;
  }

 private:
  std::array<double, kDevelopmentalGenes> dev_{};
  std::optional<PlasticityGenes> plasticity_;
  std::optional<PlasticityRange> plasticity_range_;
};

// Each developmental scalar uniform over its range; the division window pair
// is ordered after drawing.
Genome sample_random(std::uint64_t seed);
// Same developmental draw as sample_random(seed) plus uniform (eta, lambda).
Genome sample_random_plastic(std::uint64_t seed, const PlasticityRange& range);

// Per-scalar Gaussian perturbation (sigma = 10% of range width) with
// probability `rate`, then clamp. Throws std::invalid_argument if rate is
// outside [0, 1].
Genome mutate(const Genome& g, double rate, std::uint64_t seed);

// Uniform crossover. Throws std::invalid_argument on shape mismatch.
Genome crossover(const Genome& a, const Genome& b, std::uint64_t seed);

// Genome file: header line naming each locus, then one genome per line with
// 54 or 56 comma-separated decimals printed round-trip exact. An optional
// leading "# ..." comment line (provenance) is written and skipped on read.
std::string genome_csv_header(bool with_plasticity);
std::string genome_to_csv_row(const Genome& g);
// `range` is attached when the row carries plasticity genes.
Genome genome_from_csv_row(std::string_view row,
                           const PlasticityRange& range = cartpole_plasticity_range());
void write_genome_file(const std::string& path, std::span<const Genome> genomes,
                       const std::string& comment = "");
std::vector<Genome> read_genome_file(const std::string& path,
                                     const PlasticityRange& range = cartpole_plasticity_range());

// Flat named-field names used in JSON records ("m0.s_prog", ..., "eta", "lambda").
std::string flat_locus_name(std::size_t i);

}  // namespace morphoplast
