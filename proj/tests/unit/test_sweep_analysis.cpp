#include <doctest.h>

#include <cmath>
#include <set>

#include "morphoplast/morphogenesis.hpp"
#include "morphoplast/rng.hpp"
#include "morphoplast/sweep_analysis.hpp"
#include "oracles.hpp"

using namespace morphoplast;

namespace {

DeltaMatrix make_matrix(const std::vector<std::vector<double>>& d, const std::vector<PlasticityParams>& pts) {
  DeltaMatrix m;
  m.points = pts;
  m.delta = d;
  for (std::size_t i = 0; i < d.size(); ++i) m.networks.push_back("n" + std::to_string(i));
  return m;
}

std::vector<PlasticityParams> line_points(std::size_t p) {
  std::vector<PlasticityParams> pts;
  for (std::size_t j = 0; j < p; ++j) pts.push_back({0.001 * static_cast<double>(j + 1), 0.0});
  return pts;
}

}  // namespace

TEST_CASE("grid sizes and contents") {
  const auto p = build_grid("primary75");
  CHECK(p.points.size() == 75);
  CHECK(p.etas.size() == 15);
  CHECK(p.lambdas.size() == 5);
  CHECK(std::count(p.etas.begin(), p.etas.end(), 0.0) == 1);
  CHECK(build_grid("extended248").points.size() == 248);
  const auto c = build_grid("coarse22");
  CHECK(c.points.size() == 22);
  for (const auto& q : c.points) CHECK(q.eta < 0.0);
  const auto m = build_grid("micro248_acrobot");
  CHECK(m.points.size() == 248);
  CHECK(m.etas.back() == 0.1);
  CHECK(m.etas.front() == -0.1);
  CHECK(std::is_sorted(m.etas.begin(), m.etas.end()));
  // eta-major layout
  CHECK(p.points[1].eta == p.etas[0]);
  CHECK(p.points[1].lambda == p.lambdas[1]);
  CHECK(p.points[5].eta == p.etas[1]);
  CHECK_THROWS(build_grid("nope"));
  CHECK(grid_names().size() == 4);
}

TEST_CASE("two-network regret fixture") {
  const auto m = make_matrix({{2.0, 0.0}, {0.0, 2.0}}, line_points(2));
  const auto r = oracle_and_regret(m);
  CHECK(r.oracle_mean == 2.0);
  CHECK(r.best_fixed_mean == 1.0);
  REQUIRE(r.regret.has_value());
  CHECK(*r.regret == doctest::Approx(0.5));
  CHECK(r.best_fixed_point == 0);  // tie goes to the gentler point
}

TEST_CASE("regret agrees with brute force on random matrices") {
  Rng rng(77);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.below(10), p = 1 + rng.below(20);
    std::vector<std::vector<double>> d(n, std::vector<double>(p));
    for (auto& row : d) {
      for (auto& v : row) v = std::round(rng.uniform(-50, 80));
    }
    const auto got = oracle_and_regret(make_matrix(d, line_points(p)));
    const auto want = oracle::brute_regret(d);
    CHECK(got.oracle_mean == doctest::Approx(want.oracle_mean).epsilon(1e-12));
    CHECK(got.best_fixed_mean == doctest::Approx(want.best_fixed_mean).epsilon(1e-12));
    CHECK(got.regret.has_value() == want.regret.has_value());
    if (got.regret && want.regret) CHECK(*got.regret == doctest::Approx(*want.regret).epsilon(1e-12));
  }
}

TEST_CASE("regret edge cases") {
  CHECK_FALSE(oracle_and_regret(make_matrix({{-1.0, -2.0}}, line_points(2))).regret.has_value());
  CHECK(*oracle_and_regret(make_matrix({{3.0, 1.0}}, line_points(2))).regret == 0.0);
  // F negative is clamped to zero -> regret 1
  CHECK(*oracle_and_regret(make_matrix({{4.0, -9.0}, {-9.0, 4.0}}, line_points(2))).regret == 1.0);
  CHECK_THROWS(oracle_and_regret(DeltaMatrix{}));
  auto ragged = make_matrix({{1.0, 2.0}, {1.0}}, line_points(2));
  CHECK_THROWS(oracle_and_regret(ragged));
}

TEST_CASE("argmax tie rule") {
  const std::vector<PlasticityParams> pts = {{-0.05, 0.0}, {0.01, 0.01}, {-0.01, 0.001}, {0.01, 0.001}};
  CHECK(preferred_argmax({1, 1, 1, 1}, pts) == 2);
  CHECK(preferred_argmax({1, 1, 0, 1}, pts) == 3);
  CHECK(preferred_argmax({1, 2, 0, 1}, pts) == 1);
}

TEST_CASE("split-half selects on odd and scores on even episodes") {
  const std::vector<PlasticityParams> pts = line_points(2);
  // point 0 looks best on odd episodes, point 1 on even ones
  EpisodeDeltas d = {{{0, 10, 0, 10}, {6, 0, 6, 0}}};
  const auto s = split_half_validation(d, pts);
  CHECK(s.selected_even_mean == 0.0);
  CHECK(s.full_oracle_mean == 5.0);
  CHECK(*s.retained == 0.0);
  EpisodeDeltas same = {{{4, 4, 4, 4}, {1, 1, 1, 1}}, {{0, 0, 0, 0}, {2, 2, 2, 2}}};
  CHECK(*split_half_validation(same, pts).retained == doctest::Approx(1.0));
  EpisodeDeltas one = {{{1}, {2}}};
  CHECK_THROWS(split_half_validation(one, pts));
}

TEST_CASE("small helpers") {
  CHECK(harm_rate({-1, 0, 2, -3}) == 0.5);
  CHECK(harm_rate({}) == 0.0);
  CHECK(normalised_delta(50) == 0.1);
  CHECK(*headroom_fraction(400, 50) == 0.5);
  CHECK_FALSE(headroom_fraction(499.5, 0.5).has_value());
  CHECK(*headroom_fraction(-300, 99, -1.0) == doctest::Approx(99.0 / 299.0));
  CHECK(adaptation_premium(5, 2) == 3);
  CHECK(*weight_change_ratio({1, 3, std::nan("")}, {4, 4}) == 2.0);
  CHECK_FALSE(weight_change_ratio({std::nan("")}, {1}).has_value());
  CHECK_FALSE(weight_change_ratio({0, 0}, {1}).has_value());
}

TEST_CASE("quintile preference") {
  std::vector<double> dw, eta;
  for (int i = 0; i < 10; ++i) {
    dw.push_back(i);
    eta.push_back(i < 4 ? 0.01 : -0.01);
  }
  const auto q = quintile_preference(dw, eta);
  for (const auto& v : q) REQUIRE(v.has_value());
  CHECK(*q[0] == 0.0);
  CHECK(*q[1] == 0.0);
  CHECK(*q[4] == 1.0);
  // all equal: everything lands in the lowest bucket
  const auto flat = quintile_preference({1, 1, 1, 1, 1}, {-1, 1, -1, 1, 1});
  CHECK(*flat[0] == doctest::Approx(0.4));
  CHECK_FALSE(flat[4].has_value());
  CHECK_THROWS(quintile_preference({1, 2}, {1, 2}));
}

TEST_CASE("survival curve") {
  const std::vector<std::optional<int>> s = {10, 50, std::nullopt, 200};
  const auto f = unsolved_fraction(s, {0, 10, 49, 50, 500});
  CHECK(f == std::vector<double>{1.0, 0.75, 0.75, 0.5, 0.25});
}

TEST_CASE("dose response") {
  const auto r = dose_response({100, 200, 300, 400}, {{9, 9}, {3, 4}, {1, 1.5}, {0.5, 0.3}});
  CHECK(r.durations == std::vector<int>{100, 200, 300, 400});
  CHECK(r.switch_times == std::vector<int>{400, 300, 200, 100});
  CHECK(*r.rho == doctest::Approx(1.0));
  CHECK(r.strictly_increasing);
  CHECK_FALSE(r.ties);
  const auto flat = dose_response({100, 200}, {{1}, {1}});
  CHECK(flat.ties);
  CHECK(*flat.rho == 0.0);
  CHECK_FALSE(flat.strictly_increasing);
}

TEST_CASE("sign pools exclude eta = 0") {
  const std::vector<PlasticityParams> pts = {{-0.01, 0}, {0.0, 0}, {0.01, 0}};
  const auto m = make_matrix({{1, 100, -1}, {2, 100, -2}, {3, 100, -3}}, pts);
  const auto s = sign_pools(m);
  CHECK(s.anti.size() == 3);
  CHECK(s.hebbian.size() == 3);
  const auto a = anti_vs_hebbian(m);
  CHECK(*a.d > 0.0);
  CHECK(a.mann_whitney.statistic == 9.0);
}

TEST_CASE("parallel sweep emits in task order regardless of workers") {
  std::vector<DevelopedNetwork> nets;
  for (std::uint64_t s = 20000; nets.size() < 2; ++s) {
    auto n = develop(sample_random(s), 10, 10, 200);
    if (n.functional_for(4, 2)) nets.push_back(std::move(n));
  }
  SweepGrid g;
  g.points = {{-0.01, 0.0}, {0.01, 0.001}, {-0.02, 0.01}};
  const std::vector<std::uint64_t> seeds = {42, 43, 44};
  auto run = [&](std::size_t workers) {
    BaselineCache cache;
    std::vector<std::string> keys;
    const auto n = run_evaluations(sweep_tasks(nets, cartpole_spec(), g, Mode::plastic), seeds, workers, cache,
                                   [&](const EvalRecord& r) { keys.push_back(r.key() + std::to_string(r.mean_reward)); });
    CHECK(n == 8);  // 6 plastic + 2 baselines
    return keys;
  };
  const auto a = run(1), b = run(4);
  CHECK(a == b);
  CHECK(a.size() == 8);
  // skipping keys avoids re-evaluation
  BaselineCache cache;
  std::size_t emitted = 0;
  const auto tasks = sweep_tasks(nets, cartpole_spec(), g, Mode::plastic);
  std::set<std::string> done;
  run_evaluations(tasks, seeds, 2, cache, [&](const EvalRecord& r) { done.insert(r.key()); });
  const auto again = run_evaluations(tasks, seeds, 2, cache, [&](const EvalRecord&) { ++emitted; },
                                     [&](const std::string& k) { return done.count(k) > 0; });
  CHECK(again == 0);
  CHECK(emitted == 0);
}
