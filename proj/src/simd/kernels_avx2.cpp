// Compiled with -mavx2 -mfma; only reached through the dispatch table after a
// runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernels_impl.hpp"

namespace fockme::simd::avx2 {

namespace {

// (a0 * b0, a1 * b1) for two packed complex pairs, b given as split re/im broadcasts.
inline __m256d cmul_bcast(__m256d a, __m256d b_re, __m256d b_im) {
  const __m256d swapped = _mm256_permute_pd(a, 0b0101);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(swapped, b_im));
}

template <std::size_t N>
void cmatvec_fixed(const cplx* m, const cplx* const* src, const cplx* coef, cplx* const* dst,
                   std::size_t count) {
  constexpr std::size_t kPairs = N / 2;
  const double* md = reinterpret_cast<const double*>(m);
  for (std::size_t j = 0; j < count; ++j) {
    const double* x = reinterpret_cast<const double*>(src[j]);
    __m256d acc[kPairs];
    for (std::size_t r = 0; r < kPairs; ++r) acc[r] = _mm256_setzero_pd();
    for (std::size_t c = 0; c < N; ++c) {
      const __m256d xr = _mm256_broadcast_sd(x + 2 * c);
      const __m256d xi = _mm256_broadcast_sd(x + 2 * c + 1);
      const double* col = md + 2 * c * N;
      for (std::size_t r = 0; r < kPairs; ++r) {
        acc[r] = _mm256_add_pd(acc[r], cmul_bcast(_mm256_loadu_pd(col + 4 * r), xr, xi));
      }
    }
    const __m256d cr = _mm256_set1_pd(coef[j].real());
    const __m256d ci = _mm256_set1_pd(coef[j].imag());
    double* y = reinterpret_cast<double*>(dst[j]);
    for (std::size_t r = 0; r < kPairs; ++r) {
      const __m256d prev = _mm256_loadu_pd(y + 4 * r);
      _mm256_storeu_pd(y + 4 * r, _mm256_add_pd(prev, cmul_bcast(acc[r], cr, ci)));
    }
  }
}

void cmatvec_generic(const cplx* m, std::size_t n, const cplx* const* src, const cplx* coef,
                     cplx* const* dst, std::size_t count) {
  constexpr std::size_t kMaxPairs = 32;
  const std::size_t pairs = n / 2;
  const double* md = reinterpret_cast<const double*>(m);
  __m256d acc[kMaxPairs];
  for (std::size_t j = 0; j < count; ++j) {
    const double* x = reinterpret_cast<const double*>(src[j]);
    for (std::size_t r = 0; r < pairs; ++r) acc[r] = _mm256_setzero_pd();
    for (std::size_t c = 0; c < n; ++c) {
      const __m256d xr = _mm256_broadcast_sd(x + 2 * c);
      const __m256d xi = _mm256_broadcast_sd(x + 2 * c + 1);
      const double* col = md + 2 * c * n;
      for (std::size_t r = 0; r < pairs; ++r) {
        acc[r] = _mm256_add_pd(acc[r], cmul_bcast(_mm256_loadu_pd(col + 4 * r), xr, xi));
      }
    }
    const __m256d cr = _mm256_set1_pd(coef[j].real());
    const __m256d ci = _mm256_set1_pd(coef[j].imag());
    double* y = reinterpret_cast<double*>(dst[j]);
    for (std::size_t r = 0; r < pairs; ++r) {
      const __m256d prev = _mm256_loadu_pd(y + 4 * r);
      _mm256_storeu_pd(y + 4 * r, _mm256_add_pd(prev, cmul_bcast(acc[r], cr, ci)));
    }
  }
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return std::max(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

}  // namespace

void cmatvec_batch(const cplx* m, std::size_t n, const cplx* const* src, const cplx* coef,
                   cplx* const* dst, std::size_t count) {
  switch (n) {
    case 4: cmatvec_fixed<4>(m, src, coef, dst, count); return;
    case 16: cmatvec_fixed<16>(m, src, coef, dst, count); return;
    default: break;
  }
  if (n % 2 != 0 || n / 2 > 32) {
    scalar::cmatvec_batch(m, n, src, coef, dst, count);
    return;
  }
  cmatvec_generic(m, n, src, coef, dst, count);
}

void lincomb(double* out, const double* base, std::size_t len, double h, const double* coeffs,
             const double* const* vecs, std::size_t nvec) {
  const __m256d hv = _mm256_set1_pd(h);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d s = _mm256_setzero_pd();
    for (std::size_t k = 0; k < nvec; ++k) {
      s = _mm256_fmadd_pd(_mm256_set1_pd(coeffs[k]), _mm256_loadu_pd(vecs[k] + i), s);
    }
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(hv, s, _mm256_loadu_pd(base + i)));
  }
  for (; i < len; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < nvec; ++k) s += coeffs[k] * vecs[k][i];
    out[i] = base[i] + h * s;
  }
}

double error_ratio(const double* err, const double* y0, const double* y1, std::size_t len,
                   double atol, double rtol) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d av = _mm256_set1_pd(atol);
  const __m256d rv = _mm256_set1_pd(rtol);
  __m256d worst = _mm256_setzero_pd();
  __m256d bad = _mm256_setzero_pd();  // max_pd drops NaNs, so track them separately
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d e = _mm256_andnot_pd(sign, _mm256_loadu_pd(err + i));
    const __m256d a = _mm256_andnot_pd(sign, _mm256_loadu_pd(y0 + i));
    const __m256d b = _mm256_andnot_pd(sign, _mm256_loadu_pd(y1 + i));
    const __m256d scale = _mm256_fmadd_pd(rv, _mm256_max_pd(a, b), av);
    const __m256d q = _mm256_div_pd(e, scale);
    bad = _mm256_or_pd(bad, _mm256_cmp_pd(_mm256_add_pd(q, _mm256_add_pd(a, b)), q, _CMP_UNORD_Q));
    worst = _mm256_max_pd(worst, q);
  }
  if (_mm256_movemask_pd(bad) != 0) return std::numeric_limits<double>::quiet_NaN();
  double result = hmax(worst);
  for (; i < len; ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = std::abs(err[i]) / scale;
    if (std::isnan(q + scale)) return std::numeric_limits<double>::quiet_NaN();
    result = std::max(result, q);
  }
  return result;
}

cplx conj_dot(const cplx* a, const cplx* b, std::size_t n) {
  const double* ad = reinterpret_cast<const double*>(a);
  const double* bd = reinterpret_cast<const double*>(b);
  __m256d same = _mm256_setzero_pd();
  __m256d cross = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d av = _mm256_loadu_pd(ad + 2 * i);
    const __m256d bv = _mm256_loadu_pd(bd + 2 * i);
    same = _mm256_fmadd_pd(av, bv, same);
    cross = _mm256_fmadd_pd(av, _mm256_permute_pd(bv, 0b0101), cross);
  }
  alignas(32) double s[4];
  alignas(32) double c[4];
  _mm256_store_pd(s, same);
  _mm256_store_pd(c, cross);
  double re = s[0] + s[1] + s[2] + s[3];
  double im = (c[0] - c[1]) + (c[2] - c[3]);
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

}  // namespace fockme::simd::avx2
