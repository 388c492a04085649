#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fockme/fock_hierarchy.hpp"
#include "fockme/simd/kernels.hpp"

using namespace fockme;
using simd::Backend;

namespace {

struct BackendGuard {
  Backend saved = simd::active().backend;
  ~BackendGuard() { simd::set_backend(saved); }
};

std::vector<cplx> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(simd::available(Backend::Scalar));
  CHECK(simd::name(Backend::Scalar) == "scalar");
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!simd::available(Backend::Avx2)) {
    MESSAGE("AVX2 not available on this CPU; skipping");
    return;
  }
  const auto& ref = simd::table(Backend::Scalar);
  const auto& vec = simd::table(Backend::Avx2);
  std::mt19937_64 rng(11);

  for (std::size_t n : {1u, 2u, 3u, 4u, 9u, 16u}) {
    for (std::size_t count : {1u, 3u, 7u}) {
      auto m = random_vec(rng, n * n);
      std::vector<std::vector<cplx>> src(count), d1(count), d2(count);
      std::vector<const cplx*> sp(count);
      std::vector<cplx*> p1(count), p2(count);
      auto coef = random_vec(rng, count);
      for (std::size_t j = 0; j < count; ++j) {
        src[j] = random_vec(rng, n);
        d1[j] = random_vec(rng, n);
        d2[j] = d1[j];
        sp[j] = src[j].data();
        p1[j] = d1[j].data();
        p2[j] = d2[j].data();
      }
      ref.cmatvec_batch(m.data(), n, sp.data(), coef.data(), p1.data(), count);
      vec.cmatvec_batch(m.data(), n, sp.data(), coef.data(), p2.data(), count);
      for (std::size_t j = 0; j < count; ++j) CHECK(max_diff(d1[j], d2[j]) < 1e-12);
    }
  }

  std::normal_distribution<double> g;
  for (std::size_t len : {1u, 5u, 8u, 33u, 1000u}) {
    std::vector<double> base(len), out1(len), out2(len);
    for (auto& x : base) x = g(rng);
    std::vector<std::vector<double>> vecs(6, std::vector<double>(len));
    std::vector<const double*> vp;
    for (auto& v : vecs) {
      for (auto& x : v) x = g(rng);
      vp.push_back(v.data());
    }
    std::vector<double> coeffs{0.1, -0.3, 0.7, 0.2, -1.1, 0.05};
    ref.lincomb(out1.data(), base.data(), len, 0.01, coeffs.data(), vp.data(), vp.size());
    vec.lincomb(out2.data(), base.data(), len, 0.01, coeffs.data(), vp.data(), vp.size());
    for (std::size_t i = 0; i < len; ++i) CHECK(std::abs(out1[i] - out2[i]) < 1e-14);

    double r1 = ref.error_ratio(vecs[0].data(), vecs[1].data(), vecs[2].data(), len, 1e-10, 1e-8);
    double r2 = vec.error_ratio(vecs[0].data(), vecs[1].data(), vecs[2].data(), len, 1e-10, 1e-8);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-14));

    auto a = random_vec(rng, len), b = random_vec(rng, len);
    CHECK(std::abs(ref.conj_dot(a.data(), b.data(), len) - vec.conj_dot(a.data(), b.data(), len)) <
          1e-11);
  }
}

TEST_CASE("error ratio reports non-finite input") {
  std::vector<Backend> backends{Backend::Scalar};
  if (simd::available(Backend::Avx2)) backends.push_back(Backend::Avx2);
  for (Backend b : backends) {
    const auto& kt = simd::table(b);
    for (std::size_t bad : {1u, 6u, 8u}) {
      std::vector<double> err(9, 1e-9), y0(9, 1.0), y1(9, 1.0);
      y1[bad] = std::nan("");
      err[bad] = std::nan("");
      CHECK(std::isnan(kt.error_ratio(err.data(), y0.data(), y1.data(), 9, 1e-10, 1e-8)));
    }
  }
}

TEST_CASE("hierarchy RHS agrees across backends") {
  if (!simd::available(Backend::Avx2)) return;
  BackendGuard guard;
  auto h = make_fock_hierarchy(two_level::dipole(1.0), WavePacket::gaussian(1.46, 5.0), 6,
                               {OutputSpec::flux(0), OutputSpec::quadrature(0, 0.3)});
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  std::vector<double> y(h.state_size());
  for (auto& x : y) x = g(rng);
  std::vector<double> d1(y.size()), d2(y.size());
  simd::set_backend(Backend::Scalar);
  h.rhs(4.7, y.data(), d1.data());
  simd::set_backend(Backend::Avx2);
  h.rhs(4.7, y.data(), d2.data());
  double m = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) m = std::max(m, std::abs(d1[i] - d2[i]));
  CHECK(m < 1e-12);
}
