// Acceptance runner: `acceptance [criterion ...]` (default: all).
// Prints one "C<k> PASS|FAIL ..." line per criterion and exits nonzero if any failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fockme/errors.hpp"
#include "fockme/experiments.hpp"
#include "fockme/fock_hierarchy.hpp"
#include "fockme/npacket.hpp"
#include "fockme/oracle_timebin.hpp"
#include "fockme/runfile.hpp"
#include "fockme/twomode.hpp"

using namespace fockme;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RhsFunction bind(const ChannelHierarchy& h) {
  return [&h](double t, const double* y, double* dy) { h.rhs(t, y, dy); };
}

// C1: golden excitation numbers.
void golden_numbers(Verdict& v) {
  for (auto [n, target] : {std::pair{1, 0.801}, std::pair{2, 0.805}}) {
    Stopwatch sw;
    const auto p = excite_point(n, 1.46);
    const double secs = sw.seconds();
    v.detail << " N=" << n << " P=" << p.p_max << " (" << secs << " s)";
    v.require(std::abs(p.p_max - target) <= 0.005, "N=" + std::to_string(n) + " value");
    v.require(secs < 1.0, "N=" + std::to_string(n) + " runtime");
  }
}

// C2: hierarchy against the single-photon closed form.
void analytic_check(Verdict& v) {
  Stopwatch sw;
  double worst = 0.0;
  for (double om : {0.5, 1.0, 1.46, 2.5, 5.0}) {
    const double t_a = 8.0 / om;
    const auto xi = WavePacket::gaussian(om, t_a);
    const auto h = make_fock_hierarchy(two_level::dipole(1.0), xi, 1);
    auto y = h.initial_state(two_level::ground());
    IntegratorConfig cfg;
    cfg.t_end = 2.0 * t_a + 12.0;
    cfg.sample_points = 401;
    cap_step(cfg, 1.0, om);
    std::vector<double> times, pe;
    integrate(bind(h), y, cfg, [&](double t, const double* s) {
      times.push_back(t);
      pe.push_back(h.matrix(s, 1, 1)(1, 1).real());
      return true;
    });
    const auto exact = analytic_single_photon(xi, 1.0, times);
    for (std::size_t i = 0; i < pe.size(); ++i) worst = std::max(worst, std::abs(pe[i] - exact[i]));
  }
  const double secs = sw.seconds();
  v.detail << " sup-norm " << worst << " (" << secs << " s)";
  v.require(worst <= 1e-4, "sup-norm");
  v.require(secs < 5.0, "runtime");
}

// C3: integrated flux endpoints of the Gaussian Fock and superposition runs.
void flux_bookkeeping(Verdict& v) {
  const std::filesystem::path dir = FOCKME_CONFIG_DIR;
  Stopwatch sw;
  struct Case {
    const char* file;
    const char* override_;
    double expected;
  };
  for (const Case& c : {Case{"gaussian_fock.json", nullptr, 1.0},
                        Case{"gaussian_superposition.json", nullptr, 1.5},
                        Case{"gaussian_fock.json", "field.n=2", 2.0}}) {
    auto cfg = load_runfile(dir / c.file);
    if (c.override_ != nullptr) set_override(cfg, c.override_);
    const auto rec = run_single(parse_single_run(cfg, dir));
    const double flux = rec.series("flux_1").back();
    v.detail << " " << c.expected << "->" << flux;
    v.require(std::abs(flux - c.expected) <= 0.01, std::string(c.file) + " flux");
  }
  const double secs = sw.seconds();
  v.detail << " (" << secs << " s)";
  v.require(secs < 5.0, "runtime");
}

// C4: scaling fits over N = 10..40.
void scaling_fits(Verdict& v) {
  Stopwatch sw;
  std::vector<int> photons;
  for (int n = 10; n <= 40; ++n) photons.push_back(n);
  const auto points = run_scaling_sweep(photons);
  const auto fits = fit_scaling(points);
  const double pa = fits.p_max.param("a").value;
  const double pb = fits.p_max.param("b").value;
  const double wa = fits.omega_opt.param("a").value;
  const double wb = fits.omega_opt.param("b").value;
  const double secs = sw.seconds();
  v.detail << " P_max: a=" << pa << " b=" << pb << " R2=" << fits.p_max.r_squared
           << "; omega_opt: a=" << wa << " b=" << wb << " R2=" << fits.omega_opt.r_squared << " ("
           << secs << " s)";
  v.require(std::abs(pa - 0.269) <= 0.02, "P_max a");
  v.require(std::abs(pb - 0.973) <= 0.02, "P_max b");
  v.require(std::abs(wa - 1.45) <= 0.05, "omega_opt a");
  v.require(std::abs(wb - 0.987) <= 0.01, "omega_opt b");
  v.require(secs <= 1800.0, "runtime");
}

// C5: large-bandwidth asymptote 5 N / omega.
void asymptote(Verdict& v) {
  Stopwatch sw;
  const auto points = run_excite_sweep({1e3, 1e4, 1e5}, {1, 5, 10});
  double worst = 0.0;
  for (const auto& p : points) {
    const double ratio = p.p_max / (5.0 * p.photons / p.omega);
    worst = std::max(worst, std::abs(ratio - 1.0));
  }
  const double secs = sw.seconds();
  v.detail << " worst relative deviation " << worst << " over " << points.size() << " points ("
           << secs << " s)";
  v.require(worst <= 0.10, "asymptote");
  v.require(secs < 120.0, "runtime");
}

// C6: Rabi frequency for a short rectangular pulse.
void rabi(Verdict& v) {
  Stopwatch sw;
  const auto r = run_rabi_rect(50, 0.02);
  const double secs = sw.seconds();
  const bool by_peaks = r.freq_peak.has_value();
  const double freq = by_peaks ? *r.freq_peak : r.freq_fit;
  v.detail << " extracted " << freq << (by_peaks ? " (peak spacing)" : " (sin^2 fit)")
           << " predicted " << r.predicted << ", " << r.extrema.size() << " extrema (" << secs
           << " s)";
  v.require(std::abs(freq / r.predicted - 1.0) <= 0.05, "frequency");
  v.require(secs < 60.0, "runtime");
}

// C7: two-mode scattering.
void scattering(Verdict& v) {
  Stopwatch sw;
  const auto grid = log_space(0.01, 100.0, 25);
  const auto table = run_scatter_sweep(grid, {1, 2, 3});
  const double grid_secs = sw.seconds();
  double defect = 0.0;
  for (const auto& p : table) defect = std::max(defect, std::abs(p.transmission + p.reflection - 1.0));

  Stopwatch sw2;
  const auto edges = run_scatter_sweep({0.05, 100.0}, {1});
  const auto bump = run_scatter_sweep({3.0}, {1, 5});
  const double extra_secs = sw2.seconds();
  for (const auto& p : edges) defect = std::max(defect, std::abs(p.transmission + p.reflection - 1.0));
  for (const auto& p : bump) defect = std::max(defect, std::abs(p.transmission + p.reflection - 1.0));
  const double r_small = edges[0].reflection;
  const double t_large = edges[1].transmission;
  const double t1 = bump[0].transmission;
  const double t5 = bump[1].transmission;
  v.detail << " R(0.05)=" << r_small << " T(100)=" << t_large << " max|T+R-1|=" << defect
           << " T(N=1,3)=" << t1 << " T(N=5,3)=" << t5 << " (grid " << grid_secs << " s, extra "
           << extra_secs << " s)";
  v.require(r_small > 0.95, "reflection at 0.05");
  v.require(t_large > 0.95, "transmission at 100");
  v.require(defect <= 1e-3, "T+R");
  v.require(t5 > t1, "bound-state bump");
  v.require(grid_secs < 600.0, "grid runtime");
  v.require(extra_secs < 3600.0, "N=5 runtime");
}

// C8: time-bin oracle equivalence and first-order convergence in dt_bin.
void oracle(Verdict& v) {
  Stopwatch sw;
  for (int n : {1, 2}) {
    const auto fine = run_oracle_check(n, 1.46, 2000);
    const auto coarse = run_oracle_check(n, 1.46, 1000);
    const double ratio = coarse.worst / fine.worst;
    v.detail << " N=" << n << ": worst " << fine.worst << " (B=2000), " << coarse.worst
             << " (B=1000), ratio " << ratio << ";";
    v.require(fine.points.size() == 10, "sample count");
    v.require(fine.worst <= 1e-3, "N=" + std::to_string(n) + " trace distance");
    v.require(ratio >= 1.5 && ratio <= 3.0, "N=" + std::to_string(n) + " convergence");
  }
  const double secs = sw.seconds();
  v.detail << " (" << secs << " s)";
  v.require(secs <= 600.0, "runtime");
}

// Hand-rolled generators for the property suite.
struct Gen {
  std::mt19937_64 rng;

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  cplx complex() {
    std::normal_distribution<double> g;
    return {g(rng), g(rng)};
  }
  Operator any(std::size_t d) {
    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) m(i, j) = complex();
    return Operator(m);
  }
  Operator hermitian(std::size_t d) {
    const Operator a = any(d);
    return cplx(0.5) * (a + a.adjoint());
  }
  Operator density(std::size_t d) {
    const Operator a = any(d);
    const Operator p = a * a.adjoint();
    return cplx(1.0 / p.trace().real()) * p;
  }
  Operator unitary(std::size_t d) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr{Eigen::MatrixXcd(any(d).matrix())};
    Eigen::MatrixXcd q = qr.householderQ();
    return Operator(Matrix(q));
  }
  SLHTriple slh(std::size_t d) {
    return {unitary(d), cplx(uniform(0.3, 1.0)) * any(d), cplx(uniform(0.0, 1.0)) * hermitian(d)};
  }
  WavePacket packet() {
    const double om = uniform(0.5, 3.0);
    return WavePacket::gaussian(om, 8.0 / om, uniform(-0.5, 0.5));
  }
};

// C9: invariant suite.
void invariants(Verdict& v) {
  Stopwatch sw;
  Gen gen{std::mt19937_64(20240917)};

  double trace_err = 0.0, off_trace = 0.0, adjoint_err = 0.0, min_eig = 1.0;
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t d = static_cast<std::size_t>(gen.integer(2, 3));
    const int N = gen.integer(1, 4);
    const SLHTriple slh = gen.slh(d);
    const WavePacket xi = gen.packet();
    const auto h = make_fock_hierarchy(slh, xi, N, {}, Storage::Full);
    auto y = h.initial_state(gen.density(d));
    IntegratorConfig cfg;
    cfg.t_end = xi.support().second;
    cfg.sample_points = 21;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    cap_step(cfg, dominant_decay_rate(MultiModeSLH::from_single(slh)), 1.0 / xi.time_scale());
    integrate(bind(h), y, cfg, [&](double, const double* s) {
      for (std::size_t m = 0; m <= static_cast<std::size_t>(N); ++m) {
        for (std::size_t n = 0; n <= static_cast<std::size_t>(N); ++n) {
          const Operator r = h.matrix(s, m, n);
          if (m == n) {
            trace_err = std::max(trace_err, std::abs(r.trace() - 1.0));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(r.matrix()));
            min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
          } else {
            off_trace = std::max(off_trace, std::abs(r.trace()));
            adjoint_err = std::max(adjoint_err, max_abs_diff(h.matrix(s, n, m), r.adjoint()));
          }
        }
      }
      return true;
    });
  }
  v.detail << " trace " << trace_err << ", off-diag trace " << off_trace << ", adjoint " << adjoint_err
           << ", min eigenvalue " << min_eig << ";";
  v.require(trace_err <= 1e-8, "trace conservation");
  v.require(off_trace <= 1e-8, "off-diagonal trace");
  v.require(adjoint_err <= 1e-9, "adjoint symmetry");
  v.require(min_eig >= -1e-7, "positivity");

  double lind_trace = 0.0, lind_lin = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = static_cast<std::size_t>(gen.integer(1, 6));
    const Operator l = gen.any(d);
    const Operator a = gen.hermitian(d), b = gen.hermitian(d);
    const cplx x = gen.complex(), z = gen.complex();
    lind_trace = std::max(lind_trace, std::abs(lindblad_dissipator(l, a).trace()));
    lind_lin = std::max(lind_lin, max_abs_diff(lindblad_dissipator(l, x * a + z * b),
                                               x * lindblad_dissipator(l, a) + z * lindblad_dissipator(l, b)));
  }
  v.detail << " Lindblad trace " << lind_trace << ", linearity " << lind_lin << ";";
  v.require(lind_trace <= 1e-12, "Lindblad trace annihilation");
  v.require(lind_lin <= 1e-12, "Lindblad linearity");

  int slh_ok = 0, slh_rejected = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = static_cast<std::size_t>(gen.integer(2, 4));
    SLHTriple good = gen.slh(d);
    try {
      good.validate(1e-10);
      ++slh_ok;
    } catch (const InvalidInput&) {
    }
    SLHTriple bad = good;
    if (trial % 2 == 0)
      bad.s = cplx(1.0 + gen.uniform(0.1, 1.0)) * bad.s;
    else
      bad.h = gen.any(d);
    try {
      bad.validate(1e-10);
    } catch (const InvalidInput&) {
      ++slh_rejected;
    }
  }
  v.detail << " SLH accepted " << slh_ok << "/50, rejected " << slh_rejected << "/50;";
  v.require(slh_ok == 50 && slh_rejected == 50, "SLH constraint checks");

  bool single_counts = true, twomode_counts = true;
  std::string twomode_example;
  for (int N = 0; N <= 8; ++N) {
    const auto h = make_fock_hierarchy(two_level::dipole(1.0), WavePacket::gaussian(1.0, 8.0), N);
    single_counts = single_counts && h.num_levels() == static_cast<std::size_t>((N + 1) * (N + 2) / 2);
    for (int Q = 0; Q <= 3; ++Q) {
      const auto t = make_twomode_hierarchy(scattering_preset(), WavePacket::gaussian(1.0, 8.0),
                                            WavePacket::gaussian(1.0, 8.0), N, Q);
      const auto expected = static_cast<std::size_t>((N + 1) * (N + 2) * (Q + 1) * (Q + 2) / 4);
      if (t.num_levels() != expected) {
        if (twomode_counts) {
          std::ostringstream os;
          os << " first mismatch N=" << N << " Q=" << Q << ": " << t.num_levels() << " vs "
             << expected;
          twomode_example = os.str();
        }
        twomode_counts = false;
      }
    }
  }
  v.detail << " counts single " << (single_counts ? "ok" : "bad") << ", two-mode "
           << (twomode_counts ? "ok" : "bad") << twomode_example << ";";
  v.require(single_counts, "single-mode equation count");
  v.require(twomode_counts, "two-mode equation count");

  double degeneration = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int N = gen.integer(1, 4);
    const SLHTriple slh = gen.slh(2);
    const WavePacket xi = gen.packet();
    NPhotonSpec spec;
    spec.basis.packets = {xi};
    spec.amplitudes[IndexTuple(static_cast<std::size_t>(N), 0)] = 1.0;
    FockHierarchyState s;
    s.n_max = N;
    LabelPairMap states;
    for (int m = 0; m <= N; ++m) {
      for (int n = 0; n <= m; ++n) {
        const Operator r = gen.any(2);
        s.matrices.push_back(r);
        states.emplace(std::pair{OccupationLabel{m}, OccupationLabel{n}}, r);
      }
    }
    const double t = gen.uniform(xi.support().first, xi.support().second);
    const auto fock = hierarchy_rhs(slh, xi, s, t);
    const auto np = npacket_hierarchy_rhs(slh, spec, states, t);
    for (int m = 0; m <= N; ++m)
      for (int n = 0; n <= m; ++n)
        degeneration = std::max(degeneration, max_abs_diff(np.at({{m}, {n}}),
                                                           fock.matrices[FockHierarchyState::index(m, n)]));
  }
  const double secs = sw.seconds();
  v.detail << " npacket degeneration " << degeneration << " (" << secs << " s)";
  v.require(degeneration <= 1e-12, "npacket degeneration");
  v.require(secs < 120.0, "runtime");
}

const std::vector<std::pair<std::string, std::function<void(Verdict&)>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> list{
      {"golden excitation numbers", golden_numbers},
      {"analytic single-photon cross-check", analytic_check},
      {"excitation-number bookkeeping", flux_bookkeeping},
      {"scaling fits", scaling_fits},
      {"large-bandwidth asymptote", asymptote},
      {"Rabi frequency", rabi},
      {"two-mode scattering", scattering},
      {"oracle equivalence", oracle},
      {"invariant suite", invariants},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria().size())) {
      std::fprintf(stderr, "usage: %s [criterion 1..%zu ...]\n", argv[0], criteria().size());
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(k));
  }
  if (selected.empty())
    for (std::size_t k = 1; k <= criteria().size(); ++k) selected.push_back(k);

  bool all = true;
  for (std::size_t k : selected) {
    const auto& [name, run] = criteria()[k - 1];
    Verdict v;
    try {
      run(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    std::printf("C%zu %s %s:%s\n", k, v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.str().c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
