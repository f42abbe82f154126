#include <cmath>

#include "morphoplast/simd/kernels.hpp"

namespace morphoplast::simd {

namespace {

void diffuse_scalar(const double* in, double* out, std::size_t width, std::size_t height,
                    double dx, double dy) {
  for (std::size_t y = 0; y < height; ++y) {
    const double* row = in + y * width;
    const double* up = in + ((y + height - 1) % height) * width;
    const double* down = in + ((y + 1) % height) * width;
    double* dst = out + y * width;
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t xl = (x + width - 1) % width;
      const std::size_t xr = (x + 1) % width;
      const double c = row[x];
      dst[x] = c + dx * (row[xl] + row[xr] - 2.0 * c) + dy * (up[x] + down[x] - 2.0 * c);
    }
  }
}

void inhibit_decay_scalar(double* c0, double* c1, double* c2, std::size_t n,
                          const InhibitDecayCoeffs& k) {
  const double keep0 = 1.0 - k.gamma[0];
  const double keep1 = 1.0 - k.gamma[1];
  const double keep2 = 1.0 - k.gamma[2];
  for (std::size_t i = 0; i < n; ++i) {
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

double hebbian_scalar(double* w, const std::int32_t* pre, const std::int32_t* post,
                      const double* x, std::size_t n, double eta, double lambda) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double dw = eta * x[pre[i]] * x[post[i]] - lambda * w[i];
    w[i] = w[i] + dw;
    lane[i & 3] += std::fabs(dw);
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double abs_sum_scalar(const double* v, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lane[i & 3] += std::fabs(v[i]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

constexpr Kernels kScalar{diffuse_scalar, inhibit_decay_scalar, hebbian_scalar, abs_sum_scalar};

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

}  // namespace morphoplast::simd
