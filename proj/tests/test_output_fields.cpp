#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fockme/errors.hpp"
#include "fockme/integrator.hpp"
#include "fockme/output_fields.hpp"

using namespace fockme;

namespace {

struct RunResult {
  OutputAccumulator acc;
  double max_diag_quad_imag = 0.0;
};

RunResult run_outputs(const SLHTriple& slh, int n_max, double omega, double phi,
                      const Operator& rho0 = two_level::ground()) {
  const double t_a = 8.0 / omega;
  auto h = make_fock_hierarchy(slh, WavePacket::gaussian(omega, t_a), n_max,
                               {OutputSpec::flux(0), OutputSpec::quadrature(0, phi)});
  auto y = h.initial_state(rho0);
  IntegratorConfig cfg;
  cfg.t_end = t_a + 8.0 / omega + 25.0;
  cfg.sample_points = 51;
  cap_step(cfg, 1.0, omega);
  RunResult r;
  integrate([&](double t, const double* a, double* b) { h.rhs(t, a, b); }, y, cfg,
            [&](double, const double* s) {
              for (std::size_t n = 0; n <= static_cast<std::size_t>(n_max); ++n)
                r.max_diag_quad_imag = std::max(r.max_diag_quad_imag, std::abs(h.output(s, 1, n, n).imag()));
              return true;
            });
  r.acc = unpack_outputs(h, y.data(), phi);
  return r;
}

}  // namespace

TEST_CASE("vacuum input and ground atom emit nothing") {
  auto s = initial_state(two_level::ground(), 0);
  auto xi = WavePacket::gaussian(1.0, 5.0);
  for (double t : {0.0, 3.0, 5.0, 9.0}) {
    CHECK(std::abs(flux_rhs(two_level::dipole(1.0), xi, s, t).at({0, 0})) == 0.0);
    for (double phi : {0.0, 0.7, 2.0})
      CHECK(std::abs(quadrature_rhs(two_level::dipole(1.0), xi, s, t, phi).at({0, 0})) == 0.0);
  }
}

TEST_CASE("without a system the flux rate is |xi|^2") {
  SLHTriple none = two_level::dipole(0.0);
  auto xi = WavePacket::gaussian(1.46, 5.0);
  auto s = initial_state(two_level::ground(), 1);
  for (double t : {2.0, 4.5, 5.0, 6.3}) {
    auto rates = flux_rhs(none, xi, s, t);
    CHECK(std::abs(rates.at({1, 1}) - std::norm(xi.eval(t))) < 1e-14);
  }
  auto r = run_outputs(none, 1, 1.46, 0.0);
  CHECK(combine_outputs(r.acc, FieldCombination::fock(1)).flux == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("long-time flux counts the input photons") {
  auto r = run_outputs(two_level::dipole(1.0), 2, 1.46, 0.0);
  CHECK(std::abs(combine_outputs(r.acc, FieldCombination::fock(1)).flux - 1.0) < 0.01);
  CHECK(std::abs(combine_outputs(r.acc, FieldCombination::fock(2)).flux - 2.0) < 0.01);
  const double s = 1.0 / std::sqrt(2.0);
  auto sup = FieldCombination::superposition({0.0, s, s});
  CHECK(std::abs(combine_outputs(r.acc, sup).flux - 1.5) < 0.01);
  CHECK(r.max_diag_quad_imag <= 1e-10);

  // The superposition is the explicit four-term sum.
  cplx by_hand = 0.5 * (r.acc.flux.at({1, 1}) + r.acc.flux.at({2, 2}) + r.acc.flux.at({2, 1}) +
                        std::conj(r.acc.flux.at({2, 1})));
  CHECK(std::abs(by_hand.imag()) < 1e-10);
  CHECK(std::abs(combine_outputs(r.acc, sup).flux - by_hand.real()) < 1e-12);
}

TEST_CASE("shifting the homodyne phase by pi flips the quadrature") {
  // Start in a superposition so that the N=1 quadrature signal is nonzero.
  Operator plus = Operator::from_entries(2, {0.5, 0.5, 0.5, 0.5});
  auto a = run_outputs(two_level::dipole(1.0), 1, 1.0, 0.4, plus);
  auto b = run_outputs(two_level::dipole(1.0), 1, 1.0, 0.4 + std::numbers::pi, plus);
  double qa = combine_outputs(a.acc, FieldCombination::fock(1)).quad;
  double qb = combine_outputs(b.acc, FieldCombination::fock(1)).quad;
  CHECK(std::abs(qa) > 0.1);
  CHECK(std::abs(qa + qb) < 1e-8);
  CHECK(std::abs(a.acc.quad.at({1, 1}) + b.acc.quad.at({1, 1})) < 1e-8);

  auto g0 = run_outputs(two_level::dipole(1.0), 1, 1.46, 0.0);
  auto g1 = run_outputs(two_level::dipole(1.0), 1, 1.46, std::numbers::pi);
  CHECK(std::abs(g0.acc.quad.at({1, 1}) + g1.acc.quad.at({1, 1})) < 1e-10);
  CHECK(std::abs(g0.acc.quad.at({1, 0})) > 0.1);
  CHECK(std::abs(g0.acc.quad.at({1, 0}) + g1.acc.quad.at({1, 0})) < 1e-8);
}

TEST_CASE("combining accumulators") {
  auto acc = OutputAccumulator::zero(2, 0.0);
  acc.flux[{2, 2}] = 1.75;
  acc.flux[{1, 1}] = 0.5;
  acc.flux[{2, 1}] = cplx(0.1, 0.2);
  CHECK(combine_outputs(acc, FieldCombination::fock(2)).flux == 1.75);
  CHECK(combine_outputs(acc, FieldCombination{}).flux == 0.0);
  CHECK(combine_outputs(acc, FieldCombination{}).quad == 0.0);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(combine_outputs(acc, FieldCombination::superposition({0.0, s, s})).flux ==
        doctest::Approx(0.5 * (1.75 + 0.5 + 0.2)));
  CHECK_THROWS_AS(combine_outputs(acc, FieldCombination::fock(3)), InvalidInput);

  FieldCombination skew;
  skew.coeffs[{2, 1}] = 1.0;  // not Hermitian: leaves an imaginary part
  CHECK_THROWS_AS(combine_outputs(acc, skew), InvalidInput);
}
