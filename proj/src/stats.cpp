#include "morphoplast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "morphoplast/rng.hpp"

namespace morphoplast::stats {

namespace {

// Sum over tie groups of (t^3 - t).
double tie_term(std::span<const double> v) {
  std::map<double, std::size_t> counts;
  for (double x : v) ++counts[x];
  double s = 0.0;
  for (const auto& [value, t] : counts) {
    const double td = static_cast<double>(t);
    s += td * td * td - td;
  }
  return s;
}

// Doubled ranks are integers even with averaged ties.
std::vector<long> doubled(const std::vector<double>& ranks) {
  std::vector<long> out(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) out[i] = std::lround(2.0 * ranks[i]);
  return out;
}

double two_sided_from_tails(double lower, double upper) { return std::min(1.0, 2.0 * std::min(lower, upper)); }

}  // namespace

std::string to_string(Method m) { return m == Method::exact ? "exact" : "normal"; }

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (q < 0.0 || q > 100.0) throw std::invalid_argument("percentile q must lie in [0, 100]");
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

std::optional<double> cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) return std::nullopt;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double pooled = ((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0);
  if (!(pooled > 0.0)) return std::nullopt;
  return (mean(a) - mean(b)) / std::sqrt(pooled);
}

double sign_test_binomial(std::uint64_t k, std::uint64_t n) {
  if (k > n) throw std::invalid_argument("sign test needs 0 <= k <= n");
  if (n == 0) return 1.0;
  const double nd = static_cast<double>(n);
  auto pmf = [&](std::uint64_t i) {
    const double id = static_cast<double>(i);
    return std::exp(std::lgamma(nd + 1.0) - std::lgamma(id + 1.0) - std::lgamma(nd - id + 1.0) - nd * std::log(2.0));
  };
  double lower = 0.0, upper = 0.0;
  for (std::uint64_t i = 0; i <= k; ++i) lower += pmf(i);
  for (std::uint64_t i = k; i <= n; ++i) upper += pmf(i);
  return two_sided_from_tails(lower, upper);
}

KruskalWallis kruskal_wallis_eps2(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw std::invalid_argument("Kruskal-Wallis needs at least two groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("Kruskal-Wallis group is empty");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  KruskalWallis out;
  out.n = pooled.size();
  const double n = static_cast<double>(pooled.size());
  const double ties = tie_term(pooled);
  const double correction = 1.0 - ties / (n * n * n - n);
  if (correction <= 0.0) return out;  // every value identical
  const auto ranks = average_ranks(pooled);
  double sum = 0.0;
  std::size_t at = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += ranks[at + i];
    at += g.size();
    sum += r * r / static_cast<double>(g.size());
  }
  const double h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction;
  out.h = std::max(0.0, h);
  out.eps2 = out.h / (n - 1.0);
  return out;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("Mann-Whitney needs two nonempty samples");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = average_ranks(pooled);
  const std::size_t na = a.size(), nb = b.size(), n = pooled.size();
  double ra = 0.0;
  for (std::size_t i = 0; i < na; ++i) ra += ranks[i];
  const double nad = static_cast<double>(na), nbd = static_cast<double>(nb);
  TestResult res;
  res.n_a = na;
  res.n_b = nb;
  res.statistic = ra - nad * (nad + 1.0) / 2.0;

  if (std::min(na, nb) <= 8 && n <= 200) {
    res.method = Method::exact;
    // Distribution of the smaller group's doubled rank sum over all splits.
    const bool small_is_a = na <= nb;
    const std::size_t m = small_is_a ? na : nb;
    const auto d = doubled(ranks);
    long observed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((i < na) == small_is_a) observed += d[i];
    }
    const long max_sum = std::accumulate(d.begin(), d.end(), 0L);
    std::vector<std::vector<double>> ways(m + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = std::min(m, i + 1); j >= 1; --j) {
        for (long s = max_sum; s >= d[i]; --s) {
          ways[j][static_cast<std::size_t>(s)] += ways[j - 1][static_cast<std::size_t>(s - d[i])];
        }
      }
    }
    double total = 0.0, lower = 0.0, upper = 0.0;
    for (long s = 0; s <= max_sum; ++s) {
      const double w = ways[m][static_cast<std::size_t>(s)];
      total += w;
      if (s <= observed) lower += w;
      if (s >= observed) upper += w;
    }
    res.p = two_sided_from_tails(lower / total, upper / total);
    return res;
  }

  res.method = Method::normal;
  const double nd = static_cast<double>(n);
  const double mu = nad * nbd / 2.0;
  const double var = nad * nbd / 12.0 * ((nd + 1.0) - tie_term(pooled) / (nd * (nd - 1.0)));
  if (!(var > 0.0)) {
    res.p = 1.0;
    return res;
  }
  const double z = (std::fabs(res.statistic - mu) - 0.5) / std::sqrt(var);
  res.p = std::min(1.0, 2.0 * normal_sf(z));
  return res;
}

TestResult wilcoxon_signed(std::span<const double> diffs) {
  TestResult res;
  std::vector<double> nonzero;
  for (double d : diffs) {
    if (d == 0.0) {
      ++res.zeros_dropped;
    } else {
      nonzero.push_back(d);
    }
  }
  res.n_a = nonzero.size();
  if (nonzero.empty()) {
    res.undefined = true;
    res.p = 1.0;
    return res;
  }
  std::vector<double> mags(nonzero.size());
  for (std::size_t i = 0; i < nonzero.size(); ++i) mags[i] = std::fabs(nonzero[i]);
  const auto ranks = average_ranks(mags);
  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < nonzero.size(); ++i) (nonzero[i] > 0.0 ? w_plus : w_minus) += ranks[i];
  res.statistic = std::min(w_plus, w_minus);
  const std::size_t n = nonzero.size();

  if (n <= 25) {
    res.method = Method::exact;
    const auto d = doubled(ranks);
    const long max_sum = std::accumulate(d.begin(), d.end(), 0L);
    std::vector<double> ways(static_cast<std::size_t>(max_sum) + 1, 0.0);
    ways[0] = 1.0;
    for (const long r : d) {
      for (long s = max_sum; s >= r; --s) ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - r)];
    }
    const long observed = std::lround(2.0 * w_plus);
    double total = 0.0, lower = 0.0, upper = 0.0;
    for (long s = 0; s <= max_sum; ++s) {
      const double w = ways[static_cast<std::size_t>(s)];
      total += w;
      if (s <= observed) lower += w;
      if (s >= observed) upper += w;
    }
    res.p = two_sided_from_tails(lower / total, upper / total);
    return res;
  }

  res.method = Method::normal;
  const double nd = static_cast<double>(n);
  const double mu = nd * (nd + 1.0) / 4.0;
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term(mags) / 48.0;
  const double z = (std::fabs(w_plus - mu) - 0.5) / std::sqrt(var);
  res.p = std::min(1.0, 2.0 * normal_sf(z));
  return res;
}

std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman_rho needs equal lengths");
  if (x.size() < 2) throw std::invalid_argument("spearman_rho needs at least two pairs");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double bonferroni(double p, std::size_t comparisons) {
  return std::min(1.0, p * static_cast<double>(std::max<std::size_t>(comparisons, 1)));
}

BootstrapCI bootstrap_ci(const std::vector<std::vector<double>>& groups, const GroupStatistic& statistic,
                         std::size_t resamples, double level, std::uint64_t seed, std::size_t workers) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap level must lie in (0, 1)");
  if (resamples == 0) throw std::invalid_argument("bootstrap needs at least one resample");
  std::vector<std::optional<double>> values(resamples);
  auto run_block = [&](std::size_t begin, std::size_t end) {
    std::vector<std::vector<double>> sample(groups.size());
    for (std::size_t b = begin; b < end; ++b) {
      Rng rng(derive_key(seed, b));
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& src = groups[g];
        sample[g].resize(src.size());
        for (auto& v : sample[g]) v = src[rng.below(src.size())];
      }
      values[b] = statistic(sample);
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, resamples));
  if (workers == 1) {
    run_block(0, resamples);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (resamples + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk, end = std::min(resamples, begin + chunk);
      if (begin < end) pool.emplace_back(run_block, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  BootstrapCI ci;
  std::vector<double> ok;
  for (const auto& v : values) {
    if (v && std::isfinite(*v)) {
      ok.push_back(*v);
    } else {
      ++ci.skipped;
    }
  }
  ci.used = ok.size();
  if (ok.empty()) {
    ci.lo = ci.hi = std::numeric_limits<double>::quiet_NaN();
    return ci;
  }
  const double tail = (1.0 - level) / 2.0 * 100.0;
  ci.lo = percentile(ok, tail);
  ci.hi = percentile(ok, 100.0 - tail);
  return ci;
}

}  // namespace morphoplast::stats
