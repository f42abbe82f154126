#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "morphoplast/simd/kernels.hpp"

namespace morphoplast::simd {

namespace {

bool cpu_has_avx2() {
#if defined(MORPHOPLAST_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa best_isa() {
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa initial_isa() {
  if (const char* env = std::getenv("MORPHOPLAST_SIMD")) {
    const std::string name(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (name == isa_name(isa)) {
        if (!isa_available(isa)) throw std::runtime_error("MORPHOPLAST_SIMD=" + name + " is not available");
        return isa;
      }
    }
    throw std::runtime_error("MORPHOPLAST_SIMD: unknown ISA '" + name + "'");
  }
  return best_isa();
}

std::atomic<const Kernels*>& active_table() {
  static std::atomic<const Kernels*> table{&kernels_for(initial_isa())};
  return table;
}

std::atomic<Isa>& active_tag() {
  static std::atomic<Isa> tag{initial_isa()};
  return tag;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return cpu_has_avx2();
    case Isa::neon:
#if defined(MORPHOPLAST_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_available(isa)) {
    throw std::runtime_error("SIMD variant '" + std::string(isa_name(isa)) + "' is not available");
  }
  switch (isa) {
#if defined(MORPHOPLAST_HAVE_AVX2)
    case Isa::avx2: return avx2_kernels();
#endif
#if defined(MORPHOPLAST_HAVE_NEON)
    case Isa::neon: return neon_kernels();
#endif
    default: return scalar_kernels();
  }
}

const Kernels& kernels() { return *active_table().load(std::memory_order_acquire); }

Isa active_isa() {
  active_table();
  return active_tag().load(std::memory_order_acquire);
}

void force_isa(Isa isa) {
  const Kernels& k = kernels_for(isa);
  active_table().store(&k, std::memory_order_release);
  active_tag().store(isa, std::memory_order_release);
}

}  // namespace morphoplast::simd
