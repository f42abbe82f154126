#pragma once

// Data-parallel inner loops of development and plastic execution.
//
// Every kernel has a scalar reference implementation and optional vector
// variants (AVX2 on x86-64, NEON on AArch64) chosen at runtime. The vector
// variants evaluate exactly the same floating-point expression tree per
// element as the scalar code, and reductions use a fixed four-lane order, so
// all variants are bit-identical. The equivalence tests hold them to that.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace morphoplast::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

// Coefficients for the fused cross-inhibition + decay step:
//   c_m <- max(0, c_m * (1 - (chi[k1][m] * c_k1 + chi[k2][m] * c_k2))) * (1 - gamma_m)
// where k1 < k2 are the two other morphogens and all c on the right-hand side
// are pre-step values.
struct InhibitDecayCoeffs {
  std::array<std::array<double, 3>, 3> chi{};  // chi[source][target], diagonal unused
  std::array<double, 3> gamma{};
};

struct Kernels {
  // One explicit 4-neighbour diffusion step on a width x height torus
  // (row-major). out = c + dx*(l + r - 2c) + dy*(u + d - 2c). `in` and `out`
  // must not alias.
  void (*diffuse)(const double* in, double* out, std::size_t width, std::size_t height,
                  double dx, double dy);

  // In-place fused cross-inhibition and decay over n cells of three fields.
  void (*inhibit_decay)(double* c0, double* c1, double* c2, std::size_t n,
                        const InhibitDecayCoeffs& k);

  // Hebbian/anti-Hebbian update over n connections:
  //   dw = eta * x[pre] * x[post] - lambda * w;  w += dw
  // Returns the sum of |dw| accumulated in four interleaved lanes
  // (lane = index % 4) combined as (l0 + l1) + (l2 + l3).
  double (*hebbian)(double* w, const std::int32_t* pre, const std::int32_t* post,
                    const double* x, std::size_t n, double eta, double lambda);

  // Sum of |v| with the same four-lane reduction order.
  double (*abs_sum)(const double* v, std::size_t n);
};

const Kernels& scalar_kernels();
#if defined(MORPHOPLAST_HAVE_AVX2)
const Kernels& avx2_kernels();
#endif
#if defined(MORPHOPLAST_HAVE_NEON)
const Kernels& neon_kernels();
#endif

// True when the variant is compiled in and the CPU supports it.
bool isa_available(Isa isa);

// Kernel table for a specific ISA; throws std::runtime_error if unavailable.
const Kernels& kernels_for(Isa isa);

// Active table. Selected once: the best available ISA unless the
// MORPHOPLAST_SIMD environment variable names another ("scalar", "avx2",
// "neon").
const Kernels& kernels();
Isa active_isa();

// Test hook: override the active ISA for the rest of the process.
void force_isa(Isa isa);

}  // namespace morphoplast::simd
