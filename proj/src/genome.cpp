#include "morphoplast/genome.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "morphoplast/rng.hpp"

namespace morphoplast {

namespace {

constexpr std::array<std::string_view, kGenesPerMorphogen> kLocusNames = {
    "s_prog",    "s_diff",    "gamma",     "d_x",        "d_y",       "chi_a",
    "chi_b",     "th_div_lo", "th_div_hi", "th_diff",    "fate_w_in", "fate_w_hid",
    "fate_w_out", "alpha",    "rho",       "c_coef",     "beta",      "tau"};

constexpr std::size_t idx(std::size_t m, Locus l) {
  return m * kGenesPerMorphogen + static_cast<std::size_t>(l);
}

double clamp_to(double v, GeneRange r) { return std::clamp(v, r.lo, r.hi); }

void order_division_windows(Genome& g) {
  for (std::size_t m = 0; m < kMorphogens; ++m) {
    double& lo = g.at(m, Locus::th_div_lo);
    double& hi = g.at(m, Locus::th_div_hi);
    if (lo > hi) std::swap(lo, hi);
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("failed to format double");
  return std::string(buf, ptr);
}

}  // namespace

GeneRange locus_range(Locus l) {
  switch (l) {
    case Locus::s_prog:
    case Locus::s_diff: return {0.0, 1.0};
    case Locus::gamma: return {0.0, 0.5};
    case Locus::d_x:
    case Locus::d_y: return {0.0, 0.25};
    case Locus::chi_a:
    case Locus::chi_b: return {0.0, 2.0};
    case Locus::th_div_lo:
    case Locus::th_div_hi:
    case Locus::th_diff: return {0.0, 1.0};
    case Locus::fate_w_in:
    case Locus::fate_w_hid:
    case Locus::fate_w_out: return {0.0, 1.0};
    case Locus::alpha: return {0.0, 2.0};
    case Locus::rho: return {0.0, 5.0};
    case Locus::c_coef: return {0.0, 1.0};
    case Locus::beta: return {0.0, 3.0};
    case Locus::tau: return {0.0, 0.5};
  }
  throw std::logic_error("unknown locus");
}

std::string_view locus_name(Locus l) { return kLocusNames[static_cast<std::size_t>(l)]; }

GeneRange gene_range(std::size_t index) {
  if (index >= kDevelopmentalGenes) throw std::out_of_range("gene index");
  return locus_range(static_cast<Locus>(index % kGenesPerMorphogen));
}

PlasticityRange cartpole_plasticity_range() { return {{-0.5, 0.5}, {0.0, 0.1}}; }
PlasticityRange acrobot_plasticity_range() { return {{-0.1, 0.1}, {0.0, 0.1}}; }

std::vector<double> Genome::flat() const {
  std::vector<double> out(dev_.begin(), dev_.end());
  if (plasticity_) {
    out.push_back(plasticity_->eta);
    out.push_back(plasticity_->lambda);
  }
  return out;
}

double Genome::flat_at(std::size_t i) const {
  if (i < kDevelopmentalGenes) return dev_[i];
  if (plasticity_ && i == kDevelopmentalGenes) return plasticity_->eta;
  if (plasticity_ && i == kDevelopmentalGenes + 1) return plasticity_->lambda;
  throw std::out_of_range("genome locus");
}

GeneRange Genome::flat_range(std::size_t i) const {
  if (i < kDevelopmentalGenes) return gene_range(i);
  if (plasticity_range_ && i == kDevelopmentalGenes) return plasticity_range_->eta;
  if (plasticity_range_ && i == kDevelopmentalGenes + 1) return plasticity_range_->lambda;
  throw std::out_of_range("genome locus");
}

bool Genome::valid() const {
  for (std::size_t i = 0; i < size(); ++i) {
    const double v = flat_at(i);
    const GeneRange r = flat_range(i);
    if (!(v >= r.lo && v <= r.hi)) return false;
  }
  for (std::size_t m = 0; m < kMorphogens; ++m) {
    if (at(m, Locus::th_div_lo) > at(m, Locus::th_div_hi)) return false;
  }
  return true;
}

std::uint64_t Genome::hash() const {
  std::uint64_t h = 0x84222325CBF29CE4ULL ^ size();
  for (std::size_t i = 0; i < size(); ++i) {
    h = splitmix64_mix(h + std::bit_cast<std::uint64_t>(flat_at(i)) + i * kGoldenGamma);
  }
  return h;
}

Genome sample_random(std::uint64_t seed) {
  Genome g;
  Rng rng(seed);
  for (std::size_t i = 0; i < kDevelopmentalGenes; ++i) {
    const GeneRange r = gene_range(i);
    g.developmental()[i] = rng.uniform(r.lo, r.hi);
  }
  order_division_windows(g);
  return g;
}

Genome sample_random_plastic(std::uint64_t seed, const PlasticityRange& range) {
  Genome g = sample_random(seed);
  Rng rng(derive_key(seed, 0x706C6173ULL));
  PlasticityGenes p;
  p.eta = rng.uniform(range.eta.lo, range.eta.hi);
  p.lambda = rng.uniform(range.lambda.lo, range.lambda.hi);
  g.set_plasticity(p, range);
  return g;
}

Genome mutate(const Genome& g, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("mutation rate must lie in [0, 1]");
  Genome out = g;
  Rng rng(seed);
  auto perturb = [&](double v, GeneRange r) {
    const double u = rng.uniform();
    const double z = rng.normal();
    if (u < rate) return clamp_to(v + z * 0.1 * r.width(), r);
    return v;
  };
  for (std::size_t i = 0; i < kDevelopmentalGenes; ++i) {
    out.developmental()[i] = perturb(g.developmental()[i], gene_range(i));
  }
  if (g.has_plasticity()) {
    const PlasticityRange r = *g.plasticity_range();
    PlasticityGenes p = *g.plasticity();
    p.eta = perturb(p.eta, r.eta);
    p.lambda = perturb(p.lambda, r.lambda);
    out.set_plasticity(p, r);
  }
  order_division_windows(out);
  return out;
}

Genome crossover(const Genome& a, const Genome& b, std::uint64_t seed) {
  if (a.has_plasticity() != b.has_plasticity()) {
    throw std::invalid_argument("crossover parents differ in shape (54 vs 56 genes)");
  }
  Genome out = a;
  Rng rng(seed);
  for (std::size_t m = 0; m < kMorphogens; ++m) {
    for (std::size_t l = 0; l < kGenesPerMorphogen; ++l) {
      // The division window is inherited as a linked pair so the child keeps
      // lo <= hi without re-ordering.
      if (static_cast<Locus>(l) == Locus::th_div_hi) continue;
      const bool from_b = rng.uniform() < 0.5;
      if (!from_b) continue;
      out.developmental()[m * kGenesPerMorphogen + l] = b.developmental()[m * kGenesPerMorphogen + l];
      if (static_cast<Locus>(l) == Locus::th_div_lo) {
        out.at(m, Locus::th_div_hi) = b.at(m, Locus::th_div_hi);
      }
    }
  }
  if (a.has_plasticity()) {
    PlasticityGenes p = *a.plasticity();
    if (rng.uniform() < 0.5) p.eta = b.plasticity()->eta;
    if (rng.uniform() < 0.5) p.lambda = b.plasticity()->lambda;
    out.set_plasticity(p, *a.plasticity_range());
  }
  return out;
}

std::string flat_locus_name(std::size_t i) {
  if (i < kDevelopmentalGenes) {
    return "m" + std::to_string(i / kGenesPerMorphogen) + "." +
           std::string(kLocusNames[i % kGenesPerMorphogen]);
  }
  if (i == kDevelopmentalGenes) return "eta";
  if (i == kDevelopmentalGenes + 1) return "lambda";
  throw std::out_of_range("genome locus");
}

std::string genome_csv_header(bool with_plasticity) {
  std::string out;
  const std::size_t n = kDevelopmentalGenes + (with_plasticity ? 2 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ',';
    out += flat_locus_name(i);
  }
  return out;
}

std::string genome_to_csv_row(const Genome& g) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ',';
    out += format_double(g.flat_at(i));
  }
  return out;
}

Genome genome_from_csv_row(std::string_view row, const PlasticityRange& range) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= row.size()) {
    std::size_t end = row.find(',', pos);
    if (end == std::string_view::npos) end = row.size();
    std::string_view tok = row.substr(pos, end - pos);
    while (!tok.empty() && (tok.front() == ' ')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\r')) tok.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw std::invalid_argument("bad genome value '" + std::string(tok) + "'");
    }
    vals.push_back(v);
    pos = end + 1;
  }
  if (vals.size() != kDevelopmentalGenes && vals.size() != kDevelopmentalGenes + 2) {
    throw std::invalid_argument("genome row has " + std::to_string(vals.size()) +
                                " values, expected 54 or 56");
  }
  Genome g;
  std::copy_n(vals.begin(), kDevelopmentalGenes, g.developmental().begin());
  if (vals.size() == kDevelopmentalGenes + 2) {
    g.set_plasticity({vals[kDevelopmentalGenes], vals[kDevelopmentalGenes + 1]}, range);
  }
  if (!g.valid()) throw std::invalid_argument("genome row has out-of-range values");
  return g;
}

void write_genome_file(const std::string& path, std::span<const Genome> genomes, const std::string& comment) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open genome file " + path);
  if (!comment.empty()) out << "# " << comment << '\n';
  const bool plastic = !genomes.empty() && genomes.front().has_plasticity();
  out << genome_csv_header(plastic) << '\n';
  for (const Genome& g : genomes) {
    if (g.has_plasticity() != plastic) throw std::invalid_argument("mixed genome shapes in one file");
    out << genome_to_csv_row(g) << '\n';
  }
}

std::vector<Genome> read_genome_file(const std::string& path, const PlasticityRange& range) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open genome file " + path);
  std::string line;
  // leading '#' lines are comments (provenance)
  do {
    if (!std::getline(in, line)) return {};
  } while (line.rfind('#', 0) == 0);
  const std::size_t header_fields = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (line.rfind("m0.s_prog", 0) != 0) throw std::invalid_argument("genome file lacks locus header");
  std::vector<Genome> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    Genome g = genome_from_csv_row(line, range);
    if (g.size() != header_fields) throw std::invalid_argument("genome row width disagrees with header");
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace morphoplast
