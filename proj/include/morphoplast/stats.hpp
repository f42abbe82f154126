#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace morphoplast::stats {

enum class Method { exact, normal };

std::string to_string(Method m);

struct TestResult {
  double statistic = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n_a = 0;
  std::size_t n_b = 0;  // 0 for one-sample tests
  Method method = Method::exact;
  bool undefined = false;
  std::size_t zeros_dropped = 0;  // wilcoxon only
};

double mean(std::span<const double> v);
// Sample variance (n - 1 denominator); 0 for fewer than two values.
double variance(std::span<const double> v);

// Tie-averaged 1-based ranks, in input order.
std::vector<double> average_ranks(std::span<const double> v);

// Linear-interpolation percentile, q in [0, 100] (numpy's default).
double percentile(std::vector<double> v, double q);

// Upper tail of the standard normal.
double normal_sf(double z);

// (mean_a - mean_b) / pooled sample SD. nullopt when either group has fewer
// than two values or the pooled variance is zero.
std::optional<double> cohens_d(std::span<const double> a, std::span<const double> b);

// Exact two-sided binomial test against p0 = 0.5: doubled smaller tail,
// capped at 1. Throws std::invalid_argument unless 0 <= k <= n.
double sign_test_binomial(std::uint64_t k, std::uint64_t n);

struct KruskalWallis {
  double h = 0.0;
  double eps2 = 0.0;  // H / (N - 1)
  std::size_t n = 0;
};

// Tie-corrected H. All values identical gives H = 0. Throws with fewer than
// two groups or an empty group.
KruskalWallis kruskal_wallis_eps2(const std::vector<std::vector<double>>& groups);

// Statistic is U for group a. Exact permutation distribution of the
// (tie-averaged) rank sum when the smaller group has at most 8 values and
// N <= 200; otherwise the tie-corrected normal approximation with
// continuity correction. Throws when a group is empty.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

// Signed-rank test on paired differences; zeros dropped. Statistic is
// min(W+, W-). Exact for n <= 25 nonzero diffs, otherwise normal
// approximation with tie and continuity correction. All-zero input gives
// undefined = true, p = 1.
TestResult wilcoxon_signed(std::span<const double> diffs);

// Pearson correlation of tie-averaged ranks. nullopt when either input is
// constant. Throws on unequal lengths or fewer than two values.
std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y);

double bonferroni(double p, std::size_t comparisons);

// Statistic over one resample of every group; nullopt marks a degenerate
// resample, which is skipped and counted.
using GroupStatistic =
    std::function<std::optional<double>(const std::vector<std::vector<double>>&)>;

struct BootstrapCI {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

// Percentile bootstrap. Each group is resampled with replacement; resample b
// draws from derive_key(seed, b), so results do not depend on `workers`.
BootstrapCI bootstrap_ci(const std::vector<std::vector<double>>& groups, const GroupStatistic& statistic,
                         std::size_t resamples = 10000, double level = 0.95, std::uint64_t seed = 0,
                         std::size_t workers = 1);

}  // namespace morphoplast::stats
