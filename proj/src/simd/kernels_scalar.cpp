#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kernels_impl.hpp"

namespace fockme::simd::scalar {

void cmatvec_batch(const cplx* m, std::size_t n, const cplx* const* src, const cplx* coef,
                   cplx* const* dst, std::size_t count) {
  constexpr std::size_t kStack = 64;
  cplx stack_acc[kStack];
  std::vector<cplx> heap_acc;
  cplx* acc = stack_acc;
  if (n > kStack) {
    heap_acc.resize(n);
    acc = heap_acc.data();
  }
  for (std::size_t j = 0; j < count; ++j) {
    const cplx* x = src[j];
    std::fill(acc, acc + n, cplx{});
    for (std::size_t c = 0; c < n; ++c) {
      const double xr = x[c].real();
      const double xi = x[c].imag();
      const cplx* col = m + c * n;
      for (std::size_t r = 0; r < n; ++r) {
        const double mr = col[r].real();
        const double mi = col[r].imag();
        acc[r] += cplx(mr * xr - mi * xi, mr * xi + mi * xr);
      }
    }
    const double cr = coef[j].real();
    const double ci = coef[j].imag();
    cplx* y = dst[j];
    for (std::size_t r = 0; r < n; ++r) {
      const double ar = acc[r].real();
      const double ai = acc[r].imag();
      y[r] += cplx(cr * ar - ci * ai, cr * ai + ci * ar);
    }
  }
}

void lincomb(double* out, const double* base, std::size_t len, double h, const double* coeffs,
             const double* const* vecs, std::size_t nvec) {
  for (std::size_t i = 0; i < len; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < nvec; ++k) s += coeffs[k] * vecs[k][i];
    out[i] = base[i] + h * s;
  }
}

double error_ratio(const double* err, const double* y0, const double* y1, std::size_t len,
                   double atol, double rtol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = std::abs(err[i]) / scale;
    if (std::isnan(q + scale)) return std::numeric_limits<double>::quiet_NaN();
    worst = std::max(worst, q);
  }
  return worst;
}

cplx conj_dot(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real();
    const double ai = a[i].imag();
    const double br = b[i].real();
    const double bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

}  // namespace fockme::simd::scalar
