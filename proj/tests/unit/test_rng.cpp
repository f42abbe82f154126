#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "morphoplast/rng.hpp"

using namespace morphoplast;

TEST_CASE("splitmix64 reference outputs") {
  // First outputs of the reference generator seeded with 1234567.
  Rng r(1234567);
  CHECK(r.next() == 6457827717110365317ULL);
  CHECK(r.next() == 3203168211198807973ULL);
  Rng z(0);
  CHECK(z.next() == 0xe220a8397b1dcdafULL);
}

TEST_CASE("sequential stream equals counter draws") {
  Rng r(99);
  for (std::uint64_t i = 0; i < 1000; ++i) CHECK(r.next() == counter_u64(99, i));
}

TEST_CASE("derived keys differ per tag and parent") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t p = 0; p < 20; ++p) {
    for (std::uint64_t t = 0; t < 50; ++t) keys.insert(derive_key(p, t));
  }
  CHECK(keys.size() == 1000);
}

TEST_CASE("below stays in range and covers it") {
  Rng r(5);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = r.below(7);
    REQUIRE(v < 7);
    ++hits[v];
  }
  for (int h : hits) CHECK(std::abs(h - 10000) < 500);
}

TEST_CASE("unit draws and normal moments") {
  Rng r(11);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::fabs(s / n) < 0.01);
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);
}
