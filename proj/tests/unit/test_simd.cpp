#include <doctest.h>

#include <cstring>
#include <vector>

#include "morphoplast/morphogenesis.hpp"
#include "morphoplast/rng.hpp"
#include "morphoplast/simd/kernels.hpp"

using namespace morphoplast;
using namespace morphoplast::simd;

namespace {

std::vector<Isa> available() {
  std::vector<Isa> v;
  for (Isa i : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (isa_available(i)) v.push_back(i);
  }
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar is always available") {
  CHECK(isa_available(Isa::scalar));
  CHECK(isa_name(Isa::scalar) == "scalar");
  MESSAGE("active isa: " << isa_name(active_isa()));
}

TEST_CASE("diffusion variants are bit-identical") {
  const auto& ref = scalar_kernels();
  for (Isa isa : available()) {
    const auto& k = kernels_for(isa);
    for (std::size_t w : {2, 3, 5, 8, 10, 13, 20}) {
      for (std::size_t h : {2, 7, 10, 20}) {
        Rng r(w * 100 + h);
        std::vector<double> in(w * h), a(w * h), b(w * h);
        for (auto& v : in) v = r.uniform(0.0, 10.0);
        const double dx = r.uniform(0.0, 0.25), dy = r.uniform(0.0, 0.25);
        ref.diffuse(in.data(), a.data(), w, h, dx, dy);
        k.diffuse(in.data(), b.data(), w, h, dx, dy);
        CHECK(same_bits(a, b));
      }
    }
  }
}

TEST_CASE("inhibit and decay variants are bit-identical") {
  for (Isa isa : available()) {
    const auto& k = kernels_for(isa);
    for (std::size_t n : {1, 3, 4, 7, 100, 401}) {
      Rng r(n);
      InhibitDecayCoeffs c;
      for (auto& row : c.chi) {
        for (auto& v : row) v = r.uniform(0.0, 0.5);
      }
      for (auto& g : c.gamma) g = r.uniform(0.0, 0.3);
      std::array<std::vector<double>, 3> a, b;
      for (int m = 0; m < 3; ++m) {
        a[m].resize(n);
        for (auto& v : a[m]) v = r.uniform(0.0, 4.0);
        b[m] = a[m];
      }
      scalar_kernels().inhibit_decay(a[0].data(), a[1].data(), a[2].data(), n, c);
      k.inhibit_decay(b[0].data(), b[1].data(), b[2].data(), n, c);
      for (int m = 0; m < 3; ++m) CHECK(same_bits(a[m], b[m]));
    }
  }
}

TEST_CASE("hebbian and abs-sum variants are bit-identical") {
  for (Isa isa : available()) {
    const auto& k = kernels_for(isa);
    for (std::size_t n : {0, 1, 2, 5, 8, 9, 63, 1000}) {
      Rng r(n + 17);
      std::vector<double> x(40);
      for (auto& v : x) v = r.uniform(-1.0, 1.0);
      std::vector<std::int32_t> pre(n), post(n);
      std::vector<double> wa(n);
      for (std::size_t i = 0; i < n; ++i) {
        pre[i] = static_cast<std::int32_t>(r.below(40));
        post[i] = static_cast<std::int32_t>(r.below(40));
        wa[i] = r.uniform(-1.0, 1.0);
      }
      auto wb = wa;
      const double sa = scalar_kernels().hebbian(wa.data(), pre.data(), post.data(), x.data(), n, -0.2, 0.03);
      const double sb = k.hebbian(wb.data(), pre.data(), post.data(), x.data(), n, -0.2, 0.03);
      CHECK(std::memcmp(&sa, &sb, sizeof(double)) == 0);
      CHECK(same_bits(wa, wb));
      const double aa = scalar_kernels().abs_sum(wa.data(), n);
      const double ab = k.abs_sum(wa.data(), n);
      CHECK(std::memcmp(&aa, &ab, sizeof(double)) == 0);
    }
  }
}

TEST_CASE("development is identical under every isa") {
  std::vector<DevelopedNetwork> ref;
  force_isa(Isa::scalar);
  for (std::uint64_t s = 0; s < 15; ++s) ref.push_back(develop(sample_random(s), 10, 10, 200));
  for (Isa isa : available()) {
    force_isa(isa);
    for (std::uint64_t s = 0; s < 15; ++s) CHECK(develop(sample_random(s), 10, 10, 200) == ref[s]);
  }
}
