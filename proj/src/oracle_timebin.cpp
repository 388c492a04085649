#include "fockme/oracle_timebin.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fockme/errors.hpp"

namespace fockme {

namespace {

struct Coupling {
  double gamma;  // |c|^2 for L = c sigma_-
  double delta;  // H(e,e) - H(g,g)
};

// Extracts L = c sigma_- and diagonal H; anything else is outside the sector model.
Coupling dipole_coupling(const Operator& l, const Operator& h, const Operator* s) {
  if (l.dim() != 2 || h.dim() != 2) {
    throw UnsupportedConfiguration("time-bin oracle supports a two-level system only");
  }
  if (s != nullptr && max_abs_diff(*s, Operator::identity(2)) > 1e-12) {
    throw UnsupportedConfiguration("time-bin oracle requires S = I");
  }
  const cplx c = l(0, 1);
  if (std::abs(l(0, 0)) > 1e-12 || std::abs(l(1, 0)) > 1e-12 || std::abs(l(1, 1)) > 1e-12 ||
      std::abs(c.imag()) > 1e-12 || c.real() < 0.0) {
    throw UnsupportedConfiguration("time-bin oracle requires L = c sigma_- with real c >= 0");
  }
  if (std::abs(h(0, 1)) > 1e-12 || std::abs(h(1, 0)) > 1e-12) {
    throw UnsupportedConfiguration("time-bin oracle requires a diagonal Hamiltonian");
  }
  return {c.real() * c.real(), (h(1, 1) - h(0, 0)).real()};
}

// exp of [[-i delta dt, -a], [a, 0]] acting on (excited, ground) amplitudes.
std::array<cplx, 4> pair_unitary(double a, double delta_dt) {
  const cplx tau(0.0, -0.5 * delta_dt);
  const double w = std::sqrt(0.25 * delta_dt * delta_dt + a * a);
  const double sinc = w == 0.0 ? 1.0 : std::sin(w) / w;
  const cplx phase = std::exp(tau);
  const double cw = std::cos(w);
  // M - tau I = [[tau, -a], [a, -tau]]
  return {phase * (cw + sinc * tau), phase * (-sinc * a), phase * (sinc * a),
          phase * (cw - sinc * tau)};
}

cplx permanent(const std::vector<std::vector<cplx>>& m) {
  const std::size_t n = m.size();
  if (n == 0) return 1.0;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  cplx total{};
  do {
    cplx prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) prod *= m[i][perm[i]];
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

std::vector<cplx> sample_packet(const WavePacket& p, std::size_t bins, double t0, double dt) {
  std::vector<cplx> u(bins);
  double norm = 0.0;
  for (std::size_t j = 0; j < bins; ++j) {
    u[j] = p.eval(t0 + (static_cast<double>(j) + 0.5) * dt) * std::sqrt(dt);
    norm += std::norm(u[j]);
  }
  if (std::abs(norm - 1.0) > 1e-6) {
    throw InvalidInput("time-bin grid does not resolve the packet: sum |xi|^2 dt = " +
                       std::to_string(norm));
  }
  return u;
}

}  // namespace

void TimeBinConfig::validate() const {
  if (bins == 0 || !(dt_bin > 0.0)) throw InvalidInput("time-bin oracle: need bins > 0, dt > 0");
  if (samples == 0 || bins % samples != 0) {
    throw InvalidInput("time-bin oracle: bins must be a multiple of samples");
  }
  if (input.empty()) throw InvalidInput("time-bin oracle: empty input field");
  for (const auto& c : input) {
    c.field.validate();
    const int n = c.field.photons();
    if (n > n_total_max || (atom_excited != cplx{} && n + 1 > n_total_max)) {
      throw InvalidInput("time-bin oracle: input exceeds n_total_max");
    }
  }
}

SectorState::SectorState(std::size_t bins, int n_total_max) : bins_(bins), n_max_(n_total_max) {
  if (n_total_max < 0) throw InvalidInput("n_total_max must be >= 0");
  const std::size_t top = bins + static_cast<std::size_t>(n_total_max) + 1;
  binom_.assign(static_cast<std::size_t>(n_total_max) + 2, std::vector<std::uint64_t>(top + 1, 0));
  for (std::size_t x = 0; x <= top; ++x) {
    binom_[0][x] = 1;
    for (std::size_t k = 1; k < binom_.size(); ++k) {
      binom_[k][x] = x == 0 ? 0 : binom_[k][x - 1] + binom_[k - 1][x - 1];
    }
  }
  sectors_.resize(static_cast<std::size_t>(n_total_max) + 1);
  for (int e = 0; e <= n_total_max; ++e) sectors_[static_cast<std::size_t>(e)].excitations = e;
}

std::uint64_t SectorState::binom(std::uint64_t n, std::uint64_t k) const {
  if (k >= binom_.size() || n >= binom_[k].size()) {
    throw InvalidInput("time-bin oracle: binomial table exceeded");
  }
  return binom_[k][n];
}

std::uint64_t SectorState::multiset_count(int n) const {
  if (n < 0) return 0;
  if (n == 0) return 1;
  return binom(bins_ + static_cast<std::size_t>(n) - 1, static_cast<std::uint64_t>(n));
}

std::uint64_t SectorState::rank(const std::vector<std::uint32_t>& sorted) const {
  std::uint64_t r = 0;
  for (std::size_t l = 0; l < sorted.size(); ++l) r += binom(sorted[l] + l, l + 1);
  return r;
}

std::vector<std::uint32_t> SectorState::unrank(std::uint64_t r, int n) const {
  std::vector<std::uint32_t> out(static_cast<std::size_t>(n));
  std::uint64_t hi = bins_ + static_cast<std::size_t>(n);
  for (int l = n - 1; l >= 0; --l) {
    const auto k = static_cast<std::uint64_t>(l + 1);
    // largest c with C(c, k) <= r
    std::uint64_t lo = static_cast<std::uint64_t>(l);
    std::uint64_t top = hi;
    while (lo + 1 < top) {
      const std::uint64_t mid = (lo + top) / 2;
      if (binom(mid, k) <= r) {
        lo = mid;
      } else {
        top = mid;
      }
    }
    r -= binom(lo, k);
    out[static_cast<std::size_t>(l)] = static_cast<std::uint32_t>(lo - static_cast<std::uint64_t>(l));
    hi = lo;
  }
  return out;
}

double SectorState::norm_squared() const {
  double total = 0.0;
  for (const auto& s : sectors_) {
    for (const auto& v : s.ground) total += std::norm(v);
    for (const auto& v : s.excited) total += std::norm(v);
  }
  return total;
}

SectorState build_input_state(const TimeBinConfig& cfg) {
  cfg.validate();
  SectorState state(cfg.bins, cfg.n_total_max);
  for (const auto& comp : cfg.input) {
    const NPhotonSpec& spec = comp.field;
    const int n = spec.photons();
    std::vector<std::vector<cplx>> u;
    for (const auto& p : spec.basis.packets) u.push_back(sample_packet(p, cfg.bins, cfg.t_start, cfg.dt_bin));

    std::vector<cplx> field(state.multiset_count(n), cplx{});
    for (std::uint64_t r = 0; r < field.size(); ++r) {
      const auto bins = state.unrank(r, n);
      double mult = 1.0;
      for (std::size_t i = 0; i < bins.size();) {
        std::size_t j = i;
        while (j < bins.size() && bins[j] == bins[i]) ++j;
        mult *= factorial(static_cast<int>(j - i));
        i = j;
      }
      cplx amp{};
      for (const auto& [idx, lambda] : spec.amplitudes) {
        double occ = 1.0;
        for (int c : spec.occupation(idx)) occ *= factorial(c);
        std::vector<std::vector<cplx>> m(idx.size(), std::vector<cplx>(bins.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) {
          for (std::size_t l = 0; l < bins.size(); ++l) {
            m[i][l] = u[static_cast<std::size_t>(idx[i])][bins[l]];
          }
        }
        amp += lambda / std::sqrt(occ) * permanent(m);
      }
      field[r] = comp.amplitude * amp / std::sqrt(mult);
    }

    if (cfg.atom_ground != cplx{}) {
      auto& g = state.sectors()[static_cast<std::size_t>(n)].ground;
      if (g.empty()) g.assign(field.size(), cplx{});
      for (std::size_t r = 0; r < field.size(); ++r) g[r] += cfg.atom_ground * field[r];
    }
    if (cfg.atom_excited != cplx{}) {
      auto& e = state.sectors()[static_cast<std::size_t>(n + 1)].excited;
      if (e.empty()) e.assign(field.size(), cplx{});
      for (std::size_t r = 0; r < field.size(); ++r) e[r] += cfg.atom_excited * field[r];
    }
  }
  // Every sector that can be reached needs both halves allocated.
  for (auto& s : state.sectors()) {
    if (s.ground.empty() && s.excited.empty()) continue;
    if (s.ground.empty()) s.ground.assign(state.multiset_count(s.excitations), cplx{});
    if (s.excited.empty() && s.excitations > 0) {
      s.excited.assign(state.multiset_count(s.excitations - 1), cplx{});
    }
  }
  const double norm = state.norm_squared();
  if (std::abs(norm - 1.0) > 1e-6) {
    throw InvalidInput("time-bin input state has norm^2 " + std::to_string(norm));
  }
  return state;
}

void step_collision(SectorState& state, std::size_t k, const SLHTriple& slh, double dt_bin) {
  if (k >= state.bins()) throw InvalidInput("bin index out of range");
  const Coupling cp = dipole_coupling(slh.l, slh.h, &slh.s);
  const auto bin = static_cast<std::uint32_t>(k);
  for (auto& s : state.sectors()) {
    if (s.excitations == 0 || s.excited.empty()) continue;
    std::vector<std::array<cplx, 4>> u;
    for (int j = 1; j <= s.excitations; ++j) {
      u.push_back(pair_unitary(std::sqrt(cp.gamma * dt_bin * j), cp.delta * dt_bin));
    }
    const int n = s.excitations - 1;
    std::vector<std::uint32_t> bigger(static_cast<std::size_t>(n + 1));
    for (std::uint64_t r = 0; r < s.excited.size(); ++r) {
      const auto small = state.unrank(r, n);
      const auto pos = std::lower_bound(small.begin(), small.end(), bin) - small.begin();
      std::copy(small.begin(), small.begin() + pos, bigger.begin());
      bigger[static_cast<std::size_t>(pos)] = bin;
      std::copy(small.begin() + pos, small.end(), bigger.begin() + pos + 1);
      const auto mult = std::count(bigger.begin(), bigger.end(), bin);
      const std::uint64_t g = state.rank(bigger);
      const auto& m = u[static_cast<std::size_t>(mult - 1)];
      const cplx ev = s.excited[r];
      const cplx gv = s.ground[g];
      s.excited[r] = m[0] * ev + m[1] * gv;
      s.ground[g] = m[2] * ev + m[3] * gv;
    }
  }
}

Operator reduced_system_state(const SectorState& state) {
  Matrix rho = Matrix::Zero(2, 2);
  const auto& sec = state.sectors();
  for (std::size_t e = 0; e < sec.size(); ++e) {
    for (const auto& v : sec[e].ground) rho(0, 0) += std::norm(v);
    for (const auto& v : sec[e].excited) rho(1, 1) += std::norm(v);
    // <g, R| rho |e, R>: excited amplitudes of sector e pair with ground amplitudes of e - 1.
    if (e == 0 || sec[e].excited.empty() || sec[e - 1].ground.empty()) continue;
    for (std::size_t r = 0; r < sec[e].excited.size(); ++r) {
      rho(1, 0) += sec[e].excited[r] * std::conj(sec[e - 1].ground[r]);
    }
  }
  rho(0, 1) = std::conj(rho(1, 0));
  return Operator(std::move(rho));
}

namespace {

double emitted_before(const SectorState& state, std::uint32_t k) {
  double total = 0.0;
  for (const auto& s : state.sectors()) {
    auto scan = [&](const std::vector<cplx>& amps, int n) {
      for (std::uint64_t r = 0; r < amps.size(); ++r) {
        const double w = std::norm(amps[r]);
        if (w == 0.0) continue;
        const auto bins = state.unrank(r, n);
        total += w * static_cast<double>(std::lower_bound(bins.begin(), bins.end(), k) - bins.begin());
      }
    };
    scan(s.ground, s.excitations);
    if (s.excitations > 0) scan(s.excited, s.excitations - 1);
  }
  return total;
}

// sum_{j < k} <b_j>
cplx annihilation_before(const SectorState& state, std::uint32_t k) {
  cplx total{};
  const auto& sec = state.sectors();
  auto scan = [&](const std::vector<cplx>& upper, const std::vector<cplx>& lower, int n) {
    if (upper.empty() || lower.empty()) return;
    for (std::uint64_t r = 0; r < upper.size(); ++r) {
      if (upper[r] == cplx{}) continue;
      const auto bins = state.unrank(r, n);
      for (std::size_t i = 0; i < bins.size() && bins[i] < k;) {
        std::size_t j = i;
        while (j < bins.size() && bins[j] == bins[i]) ++j;
        std::vector<std::uint32_t> removed = bins;
        removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(i));
        total += std::conj(lower[state.rank(removed)]) * upper[r] *
                 std::sqrt(static_cast<double>(j - i));
        i = j;
      }
    }
  };
  for (std::size_t e = 1; e < sec.size(); ++e) {
    scan(sec[e].ground, sec[e - 1].ground, static_cast<int>(e));
    if (e >= 2) scan(sec[e].excited, sec[e - 1].excited, static_cast<int>(e) - 1);
  }
  return total;
}

}  // namespace

OracleResult run_timebin_oracle(const SLHTriple& slh, const TimeBinConfig& cfg) {
  dipole_coupling(slh.l, slh.h, &slh.s);
  SectorState state = build_input_state(cfg);
  OracleResult result;
  const std::size_t stride = cfg.bins / cfg.samples;
  for (std::size_t k = 0; k < cfg.bins; ++k) {
    step_collision(state, k, slh, cfg.dt_bin);
    if ((k + 1) % stride != 0) continue;
    const auto done = static_cast<std::uint32_t>(k + 1);
    OracleSample s{k + 1,
                   cfg.t_start + static_cast<double>(k + 1) * cfg.dt_bin,
                   reduced_system_state(state),
                   0.0,
                   emitted_before(state, done),
                   0.0};
    s.p_e = s.rho(1, 1).real();
    const cplx b = annihilation_before(state, done) * std::sqrt(cfg.dt_bin);
    s.quad_integrated = 2.0 * (std::polar(1.0, cfg.phi) * b).real();
    result.max_norm_defect = std::max(result.max_norm_defect, std::abs(state.norm_squared() - 1.0));
    result.samples.push_back(std::move(s));
  }
  return result;
}

std::vector<TwoModeOracleSample> run_twomode_oracle(const MultiModeSLH& slh, std::size_t bins,
                                                    double t_start, double dt_bin,
                                                    const TwoModeOracleInput& input,
                                                    std::size_t samples) {
  if (slh.modes() != 2) throw UnsupportedConfiguration("two-mode oracle needs two modes");
  if (bins == 0 || bins > 1000) throw UnsupportedConfiguration("two-mode oracle allows 1..1000 bins");
  if (samples == 0 || bins % samples != 0) {
    throw InvalidInput("two-mode oracle: bins must be a multiple of samples");
  }
  if (max_abs_diff(slh.s[0][1], Operator::zero(2)) > 1e-12 ||
      max_abs_diff(slh.s[1][0], Operator::zero(2)) > 1e-12) {
    throw UnsupportedConfiguration("two-mode oracle requires S_ij = delta_ij I");
  }
  const Coupling c1 = dipole_coupling(slh.l[0], slh.h, &slh.s[0][0]);
  const Coupling c2 = dipole_coupling(slh.l[1], slh.h, &slh.s[1][1]);
  const double gamma = c1.gamma + c2.gamma;
  const double w1 = gamma > 0.0 ? std::sqrt(c1.gamma / gamma) : 0.0;
  const double w2 = gamma > 0.0 ? std::sqrt(c2.gamma / gamma) : 0.0;
  if (std::abs(std::norm(input.amp_forward) + std::norm(input.amp_backward) - 1.0) > 1e-10) {
    throw InvalidInput("two-mode oracle: photon amplitudes must have unit norm");
  }

  std::array<std::vector<cplx>, 2> a;
  a[0] = sample_packet(input.xi, bins, t_start, dt_bin);
  a[1] = sample_packet(input.eta, bins, t_start, dt_bin);
  for (auto& v : a[0]) v *= input.amp_forward;
  for (auto& v : a[1]) v *= input.amp_backward;
  cplx excited{};

  const auto u = pair_unitary(std::sqrt(gamma * dt_bin), c1.delta * dt_bin);
  std::vector<TwoModeOracleSample> out;
  double emitted[2] = {0.0, 0.0};
  const std::size_t stride = bins / samples;
  for (std::size_t k = 0; k < bins; ++k) {
    const cplx bright = w1 * a[0][k] + w2 * a[1][k];
    const cplx e_new = u[0] * excited + u[1] * bright;
    const cplx b_new = u[2] * excited + u[3] * bright;
    a[0][k] += (b_new - bright) * w1;
    a[1][k] += (b_new - bright) * w2;
    excited = e_new;
    emitted[0] += std::norm(a[0][k]);
    emitted[1] += std::norm(a[1][k]);
    if ((k + 1) % stride != 0) continue;
    double ground = 0.0;
    for (const auto& mode : a) {
      for (const auto& v : mode) ground += std::norm(v);
    }
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = ground;
    rho(1, 1) = std::norm(excited);
    out.push_back({t_start + static_cast<double>(k + 1) * dt_bin, Operator(rho), std::norm(excited),
                   emitted[0], emitted[1]});
  }
  return out;
}

double trace_distance(const Operator& a, const Operator& b) {
  const Operator diff = a - b;
  Eigen::MatrixXcd m = 0.5 * (diff.matrix() + diff.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace fockme
