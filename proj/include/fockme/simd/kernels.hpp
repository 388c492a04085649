#pragma once

// Hot inner loops of the hierarchy engine and the integrator.
//
// Every kernel has a portable scalar reference implementation; an AVX2/FMA
// variant is compiled on x86-64 and selected at runtime when the CPU reports
// support. Set FOCKME_SIMD=scalar in the environment to force the reference
// path.

#include <complex>
#include <cstddef>
#include <string_view>

namespace fockme::simd {

using cplx = std::complex<double>;

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  Backend backend;

  // dst[j] += coef[j] * (M * src[j]) for j < count.
  // M is n x n, column-major; src[j] and dst[j] hold n contiguous values.
  void (*cmatvec_batch)(const cplx* m, std::size_t n, const cplx* const* src, const cplx* coef,
                        cplx* const* dst, std::size_t count);

  // out = base + h * sum_k coeffs[k] * vecs[k]; `out` may alias `base`.
  void (*lincomb)(double* out, const double* base, std::size_t len, double h,
                  const double* coeffs, const double* const* vecs, std::size_t nvec);

  // max_i |err_i| / (atol + rtol * max(|y0_i|, |y1_i|))
  double (*error_ratio)(const double* err, const double* y0, const double* y1, std::size_t len,
                        double atol, double rtol);

  // sum_i conj(a_i) * b_i
  cplx (*conj_dot)(const cplx* a, const cplx* b, std::size_t n);
};

bool available(Backend b) noexcept;
Backend best_available() noexcept;
std::string_view name(Backend b) noexcept;

/// Table for a specific backend; throws std::runtime_error when it is not available here.
const KernelTable& table(Backend b);

/// Active table. Resolved once from CPU features and FOCKME_SIMD, then
/// changeable through set_backend.
const KernelTable& active() noexcept;
void set_backend(Backend b);

}  // namespace fockme::simd
