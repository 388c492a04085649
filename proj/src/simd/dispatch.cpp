#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace fockme::simd {

namespace {

constexpr KernelTable kScalar{Backend::Scalar, scalar::cmatvec_batch, scalar::lincomb,
                              scalar::error_ratio, scalar::conj_dot};

#if defined(FOCKME_HAVE_AVX2_TU)
constexpr KernelTable kAvx2{Backend::Avx2, avx2::cmatvec_batch, avx2::lincomb, avx2::error_ratio,
                            avx2::conj_dot};
#endif

bool cpu_has_avx2() noexcept {
#if defined(FOCKME_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() noexcept {
  const char* env = std::getenv("FOCKME_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return &kScalar;
#if defined(FOCKME_HAVE_AVX2_TU)
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

std::atomic<const KernelTable*>& active_slot() noexcept {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

bool available(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2: return cpu_has_avx2();
  }
  return false;
}

Backend best_available() noexcept { return available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar; }

std::string_view name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

const KernelTable& table(Backend b) {
  if (!available(b)) {
    throw std::runtime_error("SIMD backend '" + std::string(name(b)) + "' is not available");
  }
#if defined(FOCKME_HAVE_AVX2_TU)
  if (b == Backend::Avx2) return kAvx2;
#endif
  return kScalar;
}

const KernelTable& active() noexcept { return *active_slot().load(std::memory_order_acquire); }

void set_backend(Backend b) { active_slot().store(&table(b), std::memory_order_release); }

}  // namespace fockme::simd
