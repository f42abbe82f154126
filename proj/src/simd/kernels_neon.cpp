#include <arm_neon.h>

#include <cmath>

#include "morphoplast/simd/kernels.hpp"

namespace morphoplast::simd {

namespace {

// Two-wide float64 lanes; accumulators are kept as two registers so that the
// reduction still runs over four lanes (index % 4) like the scalar code.
// vmulq/vaddq/vsubq only: no fused multiply-add.

inline double diffuse_point(double c, double l, double r, double u, double d, double dx, double dy) {
  return c + dx * (l + r - 2.0 * c) + dy * (u + d - 2.0 * c);
}

void diffuse_neon(const double* in, double* out, std::size_t width, std::size_t height,
                  double dx, double dy) {
  const float64x2_t vdx = vdupq_n_f64(dx);
  const float64x2_t vdy = vdupq_n_f64(dy);
  const float64x2_t two = vdupq_n_f64(2.0);
  for (std::size_t y = 0; y < height; ++y) {
    const double* row = in + y * width;
    const double* up = in + ((y + height - 1) % height) * width;
    const double* down = in + ((y + 1) % height) * width;
    double* dst = out + y * width;
    dst[0] = diffuse_point(row[0], row[width - 1], row[1 % width], up[0], down[0], dx, dy);
    std::size_t x = 1;
    for (; x + 2 < width; x += 2) {
      const float64x2_t c = vld1q_f64(row + x);
      const float64x2_t c2 = vmulq_f64(two, c);
      const float64x2_t lap_x = vsubq_f64(vaddq_f64(vld1q_f64(row + x - 1), vld1q_f64(row + x + 1)), c2);
      const float64x2_t lap_y = vsubq_f64(vaddq_f64(vld1q_f64(up + x), vld1q_f64(down + x)), c2);
      vst1q_f64(dst + x, vaddq_f64(vaddq_f64(c, vmulq_f64(vdx, lap_x)), vmulq_f64(vdy, lap_y)));
    }
    for (; x < width; ++x) {
      dst[x] = diffuse_point(row[x], row[x - 1], row[(x + 1) % width], up[x], down[x], dx, dy);
    }
  }
}

void inhibit_decay_neon(double* c0, double* c1, double* c2, std::size_t n,
                        const InhibitDecayCoeffs& k) {
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const double keep0 = 1.0 - k.gamma[0];
  const double keep1 = 1.0 - k.gamma[1];
  const double keep2 = 1.0 - k.gamma[2];
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t a = vld1q_f64(c0 + i);
    const float64x2_t b = vld1q_f64(c1 + i);
    const float64x2_t c = vld1q_f64(c2 + i);
    const float64x2_t v0 = vmulq_f64(a, vsubq_f64(one, vaddq_f64(vmulq_n_f64(b, k.chi[1][0]),
                                                                 vmulq_n_f64(c, k.chi[2][0]))));
    const float64x2_t v1 = vmulq_f64(b, vsubq_f64(one, vaddq_f64(vmulq_n_f64(a, k.chi[0][1]),
                                                                 vmulq_n_f64(c, k.chi[2][1]))));
    const float64x2_t v2 = vmulq_f64(c, vsubq_f64(one, vaddq_f64(vmulq_n_f64(a, k.chi[0][2]),
                                                                 vmulq_n_f64(b, k.chi[1][2]))));
    // v > 0 ? v : 0, matching the scalar select (not vmaxq, which propagates NaN).
    vst1q_f64(c0 + i, vmulq_n_f64(vbslq_f64(vcgtq_f64(v0, zero), v0, zero), keep0));
    vst1q_f64(c1 + i, vmulq_n_f64(vbslq_f64(vcgtq_f64(v1, zero), v1, zero), keep1));
    vst1q_f64(c2 + i, vmulq_n_f64(vbslq_f64(vcgtq_f64(v2, zero), v2, zero), keep2));
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

double hebbian_neon(double* w, const std::int32_t* pre, const std::int32_t* post, const double* x,
                    std::size_t n, double eta, double lambda) {
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int half = 0; half < 2; ++half) {
      const std::size_t j = i + 2 * half;
      const double xp[2] = {x[pre[j]], x[pre[j + 1]]};
      const double xq[2] = {x[post[j]], x[post[j + 1]]};
      const float64x2_t wv = vld1q_f64(w + j);
      const float64x2_t dw = vsubq_f64(vmulq_f64(vmulq_n_f64(vld1q_f64(xp), eta), vld1q_f64(xq)),
                                       vmulq_n_f64(wv, lambda));
      vst1q_f64(w + j, vaddq_f64(wv, dw));
      if (half == 0) acc01 = vaddq_f64(acc01, vabsq_f64(dw));
      else acc23 = vaddq_f64(acc23, vabsq_f64(dw));
    }
  }
  double lane[4];
  vst1q_f64(lane, acc01);
  vst1q_f64(lane + 2, acc23);
  for (; i < n; ++i) {
    const double dw = eta * x[pre[i]] * x[post[i]] - lambda * w[i];
    w[i] = w[i] + dw;
    lane[i & 3] += std::fabs(dw);
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double abs_sum_neon(const double* v, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc01 = vaddq_f64(acc01, vabsq_f64(vld1q_f64(v + i)));
    acc23 = vaddq_f64(acc23, vabsq_f64(vld1q_f64(v + i + 2)));
  }
  double lane[4];
  vst1q_f64(lane, acc01);
  vst1q_f64(lane + 2, acc23);
  for (; i < n; ++i) lane[i & 3] += std::fabs(v[i]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

constexpr Kernels kNeon{diffuse_neon, inhibit_decay_neon, hebbian_neon, abs_sum_neon};

}  // namespace

const Kernels& neon_kernels() { return kNeon; }

}  // namespace morphoplast::simd
