#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fockme/errors.hpp"
#include "fockme/experiments.hpp"

using namespace fockme;

TEST_CASE("log spacing") {
  auto v = log_space(1.0, 1000.0, 4);
  REQUIRE(v.size() == 4);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == doctest::Approx(10.0));
  CHECK(v[3] == 1000.0);
}

TEST_CASE("power-law fit recovers exact data") {
  std::vector<double> x, y;
  for (int n = 10; n <= 40; ++n) {
    x.push_back(n);
    y.push_back(1.447 * std::pow(n, 0.987));
  }
  auto fit = fit_power(x, y);
  CHECK(fit.converged);
  CHECK(std::abs(fit.param("a").value - 1.447) < 1e-6);
  CHECK(std::abs(fit.param("b").value - 0.987) < 1e-6);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK_THROWS(fit.param("c"));
}

TEST_CASE("saturation fit recovers exact data") {
  std::vector<double> x, y;
  for (int n = 10; n <= 40; ++n) {
    x.push_back(n);
    y.push_back(1.0 - 0.2694 * std::pow(n, -0.973));
  }
  auto fit = fit_saturation(x, y);
  CHECK(fit.converged);
  CHECK(std::abs(fit.param("a").value - 0.2694) < 1e-6);
  CHECK(std::abs(fit.param("b").value - 0.973) < 1e-6);
}

TEST_CASE("noisy fit reports sensible confidence intervals") {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> x, y;
  for (int n = 1; n <= 30; ++n) {
    x.push_back(n);
    y.push_back(2.0 * std::pow(n, 0.5) * (1.0 + noise(rng)));
  }
  auto fit = fit_power(x, y);
  const auto& a = fit.param("a");
  const auto& b = fit.param("b");
  CHECK(a.ci_low < a.value);
  CHECK(a.value < a.ci_high);
  CHECK(a.std_error > 0.0);
  CHECK(a.ci_low < 2.0);
  CHECK(2.0 < a.ci_high);
  CHECK(b.ci_low < 0.5);
  CHECK(0.5 < b.ci_high);
  CHECK(fit.r_squared < 1.0);
  CHECK(fit.r_squared > 0.99);
  auto j = to_json(fit);
  CHECK(j["model"] == fit.model);
  CHECK(j["params"].size() == 2);
}

TEST_CASE("fit input errors") {
  CHECK_THROWS_AS(fit_power({1.0, 2.0}, {1.0}), InvalidInput);
  CHECK_THROWS_AS(fit_power({1.0, 2.0}, {1.0, 2.0}), InvalidInput);
}

TEST_CASE("strong coupling map") {
  for (double om : {0.5, 1.46, 4.0}) {
    const double t_a = 8.0 / om;
    auto xi = WavePacket::gaussian(om, t_a);
    std::vector<double> grid;
    for (int k = -20; k <= 20; ++k) grid.push_back(t_a + 0.1 * k);
    auto v = strong_coupling_map(xi, 1, 1.0, grid);
    auto best = std::max_element(v.begin(), v.end()) - v.begin();
    CHECK(grid[static_cast<std::size_t>(best)] == doctest::Approx(t_a));

    auto v4 = strong_coupling_map(xi, 4, 1.0, grid);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v4[i] == doctest::Approx(2.0 * v[i]));
  }
  const double t_max = 0.5;
  auto rect = WavePacket::rectangular(1.0, t_max);
  auto v = strong_coupling_map(rect, 9, t_max, {1.0 + t_max / 2.0});
  CHECK(v[0] == doctest::Approx(3.0 / std::sqrt(t_max)).epsilon(1e-9));
  CHECK_THROWS_AS(strong_coupling_map(rect, 1, 0.0, {1.0}), InvalidInput);
}

TEST_CASE("small-bandwidth recursion") {
  auto xi = WavePacket::gaussian(0.01, 800.0);
  const double p1 = 4.0 * std::norm(xi.eval(800.0));
  CHECK(recursive_small_bandwidth(0, xi) == 0.0);
  CHECK(recursive_small_bandwidth(1, xi) == doctest::Approx(p1));
  CHECK(recursive_small_bandwidth(2, xi) == doctest::Approx(2.0 * p1 * (1.0 - 2.0 * p1)));
}

TEST_CASE("small-bandwidth recursion tracks the hierarchy") {
  for (double omega : {0.01, 0.05}) {
    const auto xi = WavePacket::gaussian(omega, 8.0 / omega);
    for (int n = 1; n <= 4; ++n) {
      const double p = excite_point(n, omega).p_max;
      CHECK(recursive_small_bandwidth(n, xi) == doctest::Approx(p).epsilon(0.01));
    }
  }
}

TEST_CASE("excitation sweep ordering and replay") {
  auto a = run_excite_sweep({2.0, 1.0}, {2, 1});
  auto b = run_excite_sweep({1.0, 2.0}, {1, 2});
  REQUIRE(a.size() == 4);
  CHECK(a[0].photons == 1);
  CHECK(a[0].omega == 1.0);
  CHECK(a[3].photons == 2);
  CHECK(a[3].omega == 2.0);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a[i].p_max == b[i].p_max);
    CHECK(!a[i].peak_at_end);
  }
  CHECK_THROWS_AS(excite_point(1, -1.0), InvalidInput);
}

TEST_CASE("rabi oscillations") {
  auto one = run_rabi_rect(1, 3.0);
  CHECK(!one.full_oscillation);
  CHECK(one.predicted == doctest::Approx(2.0 / std::sqrt(3.0)));

  auto many = run_rabi_rect(50, 3.0);
  CHECK(!many.full_oscillation);
  CHECK(many.freq_peak.has_value());
  CHECK(std::abs(*many.freq_peak / many.predicted - 1.0) < 0.05);
  CHECK(std::abs(many.freq_fit / many.predicted - 1.0) < 0.05);
}

TEST_CASE("single run with an empty field") {
  SingleRunConfig cfg{MultiModeSLH::from_single(two_level::dipole(1.0)), two_level::ground(),
                      two_level::excited(),
                      FockField{WavePacket::gaussian(1.0, 8.0), FieldCombination::fock(0)},
                      IntegratorConfig{}};
  cfg.integrator.t_end = 16.0;
  auto rec = run_single(cfg);
  CHECK(rec.columns ==
        std::vector<std::string>{"t", "p_e", "flux_rate_1", "flux_1", "quad_1"});
  for (const auto& row : rec.rows)
    for (std::size_t c = 1; c < row.size(); ++c) CHECK(row[c] == 0.0);
}

TEST_CASE("transmitted flux has two peaks around the excitation maximum") {
  auto xi = WavePacket::gaussian(1.0, 8.0);
  SingleRunConfig cfg{scattering_preset(), two_level::ground(), two_level::excited(),
                      TwoModeField{xi, xi, TwoModeCombination::fock(1, 0)}, IntegratorConfig{}};
  cfg.integrator.t_end = 30.0;
  cfg.integrator.sample_points = 601;
  auto rec = run_single(cfg);
  auto t = rec.series("t");
  auto rate = rec.series("flux_rate_1");
  auto pe = rec.series("p_e");
  std::vector<std::size_t> peaks, dips;
  for (std::size_t i = 1; i + 1 < rate.size(); ++i) {
    if (rate[i] > rate[i - 1] && rate[i] >= rate[i + 1] && rate[i] > 1e-3) peaks.push_back(i);
    if (rate[i] < rate[i - 1] && rate[i] <= rate[i + 1] && rate[i] > 1e-6) dips.push_back(i);
  }
  REQUIRE(peaks.size() == 2);
  REQUIRE(dips.size() == 1);
  CHECK(t[peaks[0]] < t[dips[0]]);
  CHECK(t[dips[0]] < t[peaks[1]]);
  const auto pe_max = static_cast<std::size_t>(std::max_element(pe.begin(), pe.end()) - pe.begin());
  CHECK(std::abs(t[dips[0]] - t[pe_max]) < 0.5);
  CHECK(rec.series("flux_1").back() + rec.series("flux_2").back() == doctest::Approx(1.0).epsilon(1e-4));
}
