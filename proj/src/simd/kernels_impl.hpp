#pragma once

#include "fockme/simd/kernels.hpp"

namespace fockme::simd {

namespace scalar {
void cmatvec_batch(const cplx* m, std::size_t n, const cplx* const* src, const cplx* coef,
                   cplx* const* dst, std::size_t count);
void lincomb(double* out, const double* base, std::size_t len, double h, const double* coeffs,
             const double* const* vecs, std::size_t nvec);
double error_ratio(const double* err, const double* y0, const double* y1, std::size_t len,
                   double atol, double rtol);
cplx conj_dot(const cplx* a, const cplx* b, std::size_t n);
}  // namespace scalar

#if defined(FOCKME_HAVE_AVX2_TU)
namespace avx2 {
void cmatvec_batch(const cplx* m, std::size_t n, const cplx* const* src, const cplx* coef,
                   cplx* const* dst, std::size_t count);
void lincomb(double* out, const double* base, std::size_t len, double h, const double* coeffs,
             const double* const* vecs, std::size_t nvec);
double error_ratio(const double* err, const double* y0, const double* y1, std::size_t len,
                   double atol, double rtol);
cplx conj_dot(const cplx* a, const cplx* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace fockme::simd
