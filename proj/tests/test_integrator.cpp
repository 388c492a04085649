#include <doctest.h>

#include <cmath>
#include <limits>

#include "fockme/errors.hpp"
#include "fockme/experiments.hpp"
#include "fockme/fock_hierarchy.hpp"
#include "fockme/integrator.hpp"

using namespace fockme;

namespace {

void decay(double, const double* y, double* dy) { dy[0] = -y[0]; }

double rk4_error(double dt) {
  IntegratorConfig cfg;
  cfg.method = Method::Rk4Fixed;
  cfg.dt_init = dt;
  cfg.dt_min = dt;
  cfg.t_end = 2.0;
  cfg.sample_points = 2;
  std::vector<double> y{1.0, 0.0};
  // Harmonic oscillator: y = (cos t, -sin t).
  integrate([](double, const double* a, double* b) { b[0] = a[1]; b[1] = -a[0]; }, y, cfg);
  return std::hypot(y[0] - std::cos(2.0), y[1] + std::sin(2.0));
}

}  // namespace

TEST_CASE("scalar exponential decay") {
  IntegratorConfig cfg;
  cfg.t_end = 5.0;
  std::vector<double> y{1.0};
  auto stats = integrate(decay, y, cfg);
  CHECK(std::abs(y[0] - std::exp(-5.0)) < 1e-8);
  CHECK(stats.t_final == 5.0);
  CHECK(stats.samples == cfg.sample_points);
  CHECK(stats.steps > 0);
}

TEST_CASE("vacuum decay of an excited atom") {
  auto h = make_fock_hierarchy(two_level::dipole(1.0), WavePacket::gaussian(1.0, 5.0), 0);
  auto y = h.initial_state(two_level::excited());
  IntegratorConfig cfg;
  cfg.t_end = 6.0;
  cfg.sample_points = 121;
  double worst = 0.0;
  integrate([&](double t, const double* a, double* b) { h.rhs(t, a, b); }, y, cfg,
            [&](double t, const double* s) {
              worst = std::max(worst, std::abs(h.matrix(s, 0, 0)(1, 1).real() - std::exp(-t)));
              return true;
            });
  CHECK(worst <= 1e-8);
}

TEST_CASE("RK4 is fourth order") {
  const double e1 = rk4_error(0.1);
  const double e2 = rk4_error(0.05);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("sample times and early stop") {
  IntegratorConfig cfg;
  cfg.t_start = 1.0;
  cfg.t_end = 3.0;
  cfg.sample_points = 5;
  CHECK(cfg.sample_time(0) == 1.0);
  CHECK(cfg.sample_time(2) == 2.0);
  CHECK(cfg.sample_time(4) == 3.0);
  std::vector<double> seen;
  std::vector<double> y{1.0};
  auto stats = integrate(decay, y, cfg, [&](double t, const double*) {
    seen.push_back(t);
    return t < 2.0;
  });
  CHECK(seen == std::vector<double>{1.0, 1.5, 2.0});
  CHECK(stats.stopped_early);
  CHECK(std::abs(y[0] - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("recorded time series") {
  IntegratorConfig cfg;
  cfg.t_end = 1.0;
  cfg.sample_points = 11;
  std::vector<double> y{2.0};
  auto rec = integrate_record(decay, y, cfg,
                              {{"y", [](double, const double* s) { return s[0]; }},
                               {"twice", [](double, const double* s) { return 2.0 * s[0]; }}});
  CHECK(rec.columns == std::vector<std::string>{"t", "y", "twice"});
  CHECK(rec.rows.size() == 11);
  CHECK(rec.series("twice")[10] == doctest::Approx(4.0 * std::exp(-1.0)).epsilon(1e-8));
  CHECK_THROWS_AS(rec.column("missing"), InvalidInput);
}

TEST_CASE("integration is deterministic") {
  auto a = excite_point(2, 1.46);
  auto b = excite_point(2, 1.46);
  CHECK(a.p_max == b.p_max);
  CHECK(a.steps == b.steps);
}

TEST_CASE("halving rtol barely moves the single-photon optimum") {
  ExciteOptions loose;
  ExciteOptions tight;
  tight.rtol = loose.rtol / 2.0;
  const double p1 = excite_point(1, 1.46, loose).p_max;
  const double p2 = excite_point(1, 1.46, tight).p_max;
  CHECK(std::abs(p1 - p2) < 1e-6);
}

TEST_CASE("configuration errors and aborts") {
  std::vector<double> y{1.0};
  IntegratorConfig bad;
  bad.t_end = bad.t_start;
  CHECK_THROWS_AS(integrate(decay, y, bad), InvalidInput);
  bad = {};
  bad.rtol = 0.0;
  CHECK_THROWS_AS(integrate(decay, y, bad), InvalidInput);
  bad = {};
  bad.sample_points = 1;
  CHECK_THROWS_AS(integrate(decay, y, bad), InvalidInput);
  bad = {};
  bad.dt_min = 1.0;
  bad.dt_init = 0.1;
  CHECK_THROWS_AS(integrate(decay, y, bad), InvalidInput);

  IntegratorConfig cfg;
  cfg.t_end = 2.0;
  try {
    integrate([](double t, const double*, double* dy) { dy[0] = t > 1.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0; },
              y, cfg);
    FAIL("expected an abort");
  } catch (const IntegratorAbort& e) {
    CHECK(e.time() >= 1.0);
    CHECK(e.time() <= 2.0);
  }

  IntegratorConfig stiff;
  stiff.dt_min = 1e-2;
  stiff.dt_init = 1e-2;
  stiff.rtol = 1e-16;
  stiff.atol = 1e-30;
  y = {1.0};
  CHECK_THROWS_AS(integrate([](double, const double* a, double* b) { b[0] = -50.0 * a[0]; }, y, stiff),
                  IntegratorAbort);

  std::vector<double> nan_start{std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(integrate(decay, nan_start, IntegratorConfig{}), IntegratorAbort);
}

TEST_CASE("step cap") {
  IntegratorConfig cfg;
  cap_step(cfg, 1.0, 100.0);
  CHECK(cfg.dt_max == doctest::Approx(5e-4));
  CHECK(cfg.dt_init <= cfg.dt_max);
  IntegratorConfig untouched;
  cap_step(untouched, 0.0, 0.0);
  CHECK(std::isinf(untouched.dt_max));
}
