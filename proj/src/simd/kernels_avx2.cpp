#include <immintrin.h>

#include <cmath>

#include "morphoplast/simd/kernels.hpp"

namespace morphoplast::simd {

namespace {

inline double diffuse_point(double c, double l, double r, double u, double d, double dx, double dy) {
  return c + dx * (l + r - 2.0 * c) + dy * (u + d - 2.0 * c);
}

void diffuse_avx2(const double* in, double* out, std::size_t width, std::size_t height,
                  double dx, double dy) {
  const __m256d vdx = _mm256_set1_pd(dx);
  const __m256d vdy = _mm256_set1_pd(dy);
  const __m256d two = _mm256_set1_pd(2.0);
  for (std::size_t y = 0; y < height; ++y) {
    const double* row = in + y * width;
    const double* up = in + ((y + height - 1) % height) * width;
    const double* down = in + ((y + 1) % height) * width;
    double* dst = out + y * width;

    dst[0] = diffuse_point(row[0], row[width - 1], row[1 % width], up[0], down[0], dx, dy);
    std::size_t x = 1;
    for (; x + 4 < width; x += 4) {
      const __m256d c = _mm256_loadu_pd(row + x);
      const __m256d l = _mm256_loadu_pd(row + x - 1);
      const __m256d r = _mm256_loadu_pd(row + x + 1);
      const __m256d u = _mm256_loadu_pd(up + x);
      const __m256d d = _mm256_loadu_pd(down + x);
      const __m256d c2 = _mm256_mul_pd(two, c);
      const __m256d lap_x = _mm256_sub_pd(_mm256_add_pd(l, r), c2);
      const __m256d lap_y = _mm256_sub_pd(_mm256_add_pd(u, d), c2);
      const __m256d v = _mm256_add_pd(_mm256_add_pd(c, _mm256_mul_pd(vdx, lap_x)),
                                      _mm256_mul_pd(vdy, lap_y));
      _mm256_storeu_pd(dst + x, v);
    }
    for (; x < width; ++x) {
      if (x == 0) continue;
      const std::size_t xr = (x + 1) % width;
      dst[x] = diffuse_point(row[x], row[x - 1], row[xr], up[x], down[x], dx, dy);
    }
  }
}

void inhibit_decay_avx2(double* c0, double* c1, double* c2, std::size_t n,
                        const InhibitDecayCoeffs& k) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d k10 = _mm256_set1_pd(k.chi[1][0]), k20 = _mm256_set1_pd(k.chi[2][0]);
  const __m256d k01 = _mm256_set1_pd(k.chi[0][1]), k21 = _mm256_set1_pd(k.chi[2][1]);
  const __m256d k02 = _mm256_set1_pd(k.chi[0][2]), k12 = _mm256_set1_pd(k.chi[1][2]);
  const double keep0 = 1.0 - k.gamma[0];
  const double keep1 = 1.0 - k.gamma[1];
  const double keep2 = 1.0 - k.gamma[2];
  const __m256d g0 = _mm256_set1_pd(keep0), g1 = _mm256_set1_pd(keep1), g2 = _mm256_set1_pd(keep2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(c0 + i);
    const __m256d b = _mm256_loadu_pd(c1 + i);
    const __m256d c = _mm256_loadu_pd(c2 + i);
    const __m256d v0 = _mm256_mul_pd(
        a, _mm256_sub_pd(one, _mm256_add_pd(_mm256_mul_pd(k10, b), _mm256_mul_pd(k20, c))));
    const __m256d v1 = _mm256_mul_pd(
        b, _mm256_sub_pd(one, _mm256_add_pd(_mm256_mul_pd(k01, a), _mm256_mul_pd(k21, c))));
    const __m256d v2 = _mm256_mul_pd(
        c, _mm256_sub_pd(one, _mm256_add_pd(_mm256_mul_pd(k02, a), _mm256_mul_pd(k12, b))));
    _mm256_storeu_pd(c0 + i, _mm256_mul_pd(_mm256_max_pd(v0, zero), g0));
    _mm256_storeu_pd(c1 + i, _mm256_mul_pd(_mm256_max_pd(v1, zero), g1));
    _mm256_storeu_pd(c2 + i, _mm256_mul_pd(_mm256_max_pd(v2, zero), g2));
  }
  for (; i < n; ++i) {
    const double a = c0[i];
    const double b = c1[i];
    const double c = c2[i];
    const double v0 = a * (1.0 - (k.chi[1][0] * b + k.chi[2][0] * c));
    const double v1 = b * (1.0 - (k.chi[0][1] * a + k.chi[2][1] * c));
    const double v2 = c * (1.0 - (k.chi[0][2] * a + k.chi[1][2] * b));
    c0[i] = (v0 > 0.0 ? v0 : 0.0) * keep0;
    c1[i] = (v1 > 0.0 ? v1 : 0.0) * keep1;
    c2[i] = (v2 > 0.0 ? v2 : 0.0) * keep2;
  }
}

double hebbian_avx2(double* w, const std::int32_t* pre, const std::int32_t* post, const double* x,
                    std::size_t n, double eta, double lambda) {
  const __m256d veta = _mm256_set1_pd(eta);
  const __m256d vlam = _mm256_set1_pd(lambda);
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i ip = _mm_loadu_si128(reinterpret_cast<const __m128i*>(pre + i));
    const __m128i iq = _mm_loadu_si128(reinterpret_cast<const __m128i*>(post + i));
    const __m256d xp = _mm256_i32gather_pd(x, ip, 8);
    const __m256d xq = _mm256_i32gather_pd(x, iq, 8);
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d dw = _mm256_sub_pd(_mm256_mul_pd(_mm256_mul_pd(veta, xp), xq),
                                     _mm256_mul_pd(vlam, wv));
    _mm256_storeu_pd(w + i, _mm256_add_pd(wv, dw));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, dw));
  }
  // Tail elements continue their own lanes; lanes are combined only at the end.
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < n; ++i) {
    const double dw = eta * x[pre[i]] * x[post[i]] - lambda * w[i];
    w[i] = w[i] + dw;
    lane[i & 3] += std::fabs(dw);
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double abs_sum_avx2(const double* v, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, _mm256_loadu_pd(v + i)));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < n; ++i) lane[i & 3] += std::fabs(v[i]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

constexpr Kernels kAvx2{diffuse_avx2, inhibit_decay_avx2, hebbian_avx2, abs_sum_avx2};

}  // namespace

const Kernels& avx2_kernels() { return kAvx2; }

}  // namespace morphoplast::simd
