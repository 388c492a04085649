#include "fockme/twomode.hpp"

#include <cmath>
#include <string>

#include "fockme/errors.hpp"

namespace fockme {

namespace {

bool canonical(const TwoModeIndex& idx) {
  // Labels (m, p) and (n, q) compare lexicographically, ket first.
  return std::pair{idx[0], idx[2]} >= std::pair{idx[1], idx[3]};
}

TwoModeIndex flip(const TwoModeIndex& idx) { return {idx[1], idx[0], idx[3], idx[2]}; }

void require_range(const TwoModeIndex& idx, int n_max, int q_max) {
  if (idx[0] < 0 || idx[1] < 0 || idx[2] < 0 || idx[3] < 0 || idx[0] > n_max || idx[1] > n_max ||
      idx[2] > q_max || idx[3] > q_max) {
    throw InvalidInput("two-mode index outside hierarchy");
  }
}

std::map<TwoModeIndex, cplx> rates(const MultiModeSLH& slh, const WavePacket& xi,
                                   const WavePacket& eta, const TwoModeHierarchyState& state,
                                   double t, OutputSpec spec) {
  const ChannelHierarchy h = make_twomode_hierarchy(slh, xi, eta, state.n_max, state.q_max, {spec});
  const std::vector<double> y = pack_twomode_state(h, state);
  std::vector<double> dy(y.size());
  h.rhs(t, y.data(), dy.data());
  const auto* acc = reinterpret_cast<const cplx*>(dy.data()) + h.matrix_block();
  std::map<TwoModeIndex, cplx> out;
  for (std::size_t k = 0; k < h.num_levels(); ++k) out[twomode_index(h, k)] = acc[k];
  return out;
}

std::size_t mode_index(int mode) {
  if (mode != 1 && mode != 2) throw InvalidInput("mode must be 1 or 2");
  return static_cast<std::size_t>(mode - 1);
}

}  // namespace

Operator TwoModeHierarchyState::level(const TwoModeIndex& idx) const {
  require_range(idx, n_max, q_max);
  if (canonical(idx)) return matrices.at(idx);
  return matrices.at(flip(idx)).adjoint();
}

TwoModeCombination TwoModeCombination::fock(int n, int q) {
  TwoModeCombination c;
  c.coeffs[{n, n, q, q}] = 1.0;
  return c;
}

TwoModeCombination TwoModeCombination::noon_one_photon() {
  TwoModeCombination c;
  c.coeffs[{1, 1, 0, 0}] = 0.5;
  c.coeffs[{0, 1, 1, 0}] = 0.5;
  c.coeffs[{1, 0, 0, 1}] = 0.5;
  c.coeffs[{0, 0, 1, 1}] = 0.5;
  return c;
}

void TwoModeCombination::validate() const {
  // Matrix over the doubled index (m, p) x (n, q).
  std::map<std::pair<int, int>, int> slot;
  for (const auto& [idx, v] : coeffs) {
    slot.emplace(std::pair{idx[0], idx[2]}, 0);
    slot.emplace(std::pair{idx[1], idx[3]}, 0);
  }
  int next = 0;
  for (auto& [key, i] : slot) i = next++;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(next, next);
  for (const auto& [idx, v] : coeffs) c(slot[{idx[0], idx[2]}], slot[{idx[1], idx[3]}]) = v;
  if (next == 0) throw InvalidInput("two-mode combination is empty");
  if ((c - c.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidInput("two-mode combination is not Hermitian");
  }
  if (std::abs(c.trace() - 1.0) > 1e-12) throw InvalidInput("two-mode combination: trace is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw InvalidInput("two-mode combination: not positive semidefinite");
  }
}

std::vector<PairWeight> TwoModeCombination::weights(const ChannelHierarchy& h) const {
  std::vector<PairWeight> w;
  for (const auto& [idx, v] : coeffs) {
    w.push_back({h.label_index({idx[0], idx[2]}), h.label_index({idx[1], idx[3]}), std::conj(v)});
  }
  return w;
}

ChannelHierarchy make_twomode_hierarchy(const MultiModeSLH& slh, const WavePacket& xi,
                                        const WavePacket& eta, int n_max, int q_max,
                                        std::vector<OutputSpec> outputs, Storage storage,
                                        ApplyRoute route) {
  if (slh.modes() != 2) throw InvalidInput("two-mode hierarchy needs a two-mode SLH");
  if (n_max < 0 || q_max < 0) throw InvalidInput("photon numbers must be >= 0");
  std::vector<OccupationLabel> labels;
  for (int m = 0; m <= n_max; ++m) {
    for (int p = 0; p <= q_max; ++p) labels.push_back({m, p});
  }
  return ChannelHierarchy(slh, {Channel{0, xi}, Channel{1, eta}}, std::move(labels),
                          std::move(outputs), storage, route);
}

TwoModeIndex twomode_index(const ChannelHierarchy& h, std::size_t level) {
  const auto [a, b] = h.level_pair(level);
  const auto& la = h.labels()[a];
  const auto& lb = h.labels()[b];
  return {la[0], lb[0], la[1], lb[1]};
}

std::size_t twomode_independent_count(int n_max, int q_max) {
  const auto labels = static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(q_max + 1);
  return labels * (labels + 1) / 2;
}

std::size_t twomode_full_count(int n_max, int q_max) {
  const auto labels = static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(q_max + 1);
  return labels * labels;
}

TwoModeHierarchyState twomode_initial_state(const Operator& rho_sys, int n_max, int q_max) {
  if (n_max < 0 || q_max < 0) throw InvalidInput("photon numbers must be >= 0");
  require_density_matrix(rho_sys);
  TwoModeHierarchyState s;
  s.n_max = n_max;
  s.q_max = q_max;
  const Operator zero = Operator::zero(rho_sys.dim());
  for (int m = 0; m <= n_max; ++m) {
    for (int n = 0; n <= n_max; ++n) {
      for (int p = 0; p <= q_max; ++p) {
        for (int q = 0; q <= q_max; ++q) {
          const TwoModeIndex idx{m, n, p, q};
          if (canonical(idx)) s.matrices[idx] = (m == n && p == q) ? rho_sys : zero;
        }
      }
    }
  }
  return s;
}

TwoModeHierarchyState unpack_twomode_state(const ChannelHierarchy& h, const double* y, double t) {
  TwoModeHierarchyState s;
  const auto& last = h.labels().back();
  s.n_max = last[0];
  s.q_max = last[1];
  s.time = t;
  for (std::size_t k = 0; k < h.num_levels(); ++k) {
    const auto [a, b] = h.level_pair(k);
    const TwoModeIndex idx = twomode_index(h, k);
    if (canonical(idx)) s.matrices[idx] = h.matrix(y, a, b);
  }
  return s;
}

std::vector<double> pack_twomode_state(const ChannelHierarchy& h, const TwoModeHierarchyState& s) {
  const std::size_t d = h.dim();
  std::vector<double> y(h.state_size(), 0.0);
  auto* yc = reinterpret_cast<cplx*>(y.data());
  for (std::size_t k = 0; k < h.num_levels(); ++k) {
    const Operator m = s.level(twomode_index(h, k));
    if (m.dim() != d) throw InvalidInput("two-mode state: dimension mismatch");
    std::copy(m.data(), m.data() + d * d, yc + k * d * d);
  }
  return y;
}

TwoModeHierarchyState twomode_rhs(const MultiModeSLH& slh, const WavePacket& xi,
                                  const WavePacket& eta, const TwoModeHierarchyState& state,
                                  double t) {
  const ChannelHierarchy h = make_twomode_hierarchy(slh, xi, eta, state.n_max, state.q_max);
  const std::vector<double> y = pack_twomode_state(h, state);
  std::vector<double> dy(y.size());
  h.rhs(t, y.data(), dy.data());
  return unpack_twomode_state(h, dy.data(), t);
}

std::map<TwoModeIndex, cplx> twomode_flux_rhs(const MultiModeSLH& slh, const WavePacket& xi,
                                              const WavePacket& eta,
                                              const TwoModeHierarchyState& state, double t,
                                              int mode) {
  return rates(slh, xi, eta, state, t, OutputSpec::flux(mode_index(mode)));
}

std::map<TwoModeIndex, cplx> twomode_quadrature_rhs(const MultiModeSLH& slh, const WavePacket& xi,
                                                    const WavePacket& eta,
                                                    const TwoModeHierarchyState& state, double t,
                                                    int mode, double phi) {
  return rates(slh, xi, eta, state, t, OutputSpec::quadrature(mode_index(mode), phi));
}

Operator assemble_total_twomode(const TwoModeHierarchyState& state,
                                const TwoModeCombination& combo) {
  if (state.matrices.empty()) throw InvalidInput("empty two-mode state");
  const auto d = static_cast<Eigen::Index>(state.matrices.begin()->second.dim());
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& [idx, c] : combo.coeffs) sum += std::conj(c) * state.level(idx).matrix();
  return Operator(std::move(sum));
}

MultiModeSLH scattering_preset() { return two_level::waveguide(0.5, 0.5); }

MultiModeSLH swap_modes(const MultiModeSLH& slh) {
  if (slh.modes() != 2) throw InvalidInput("swap_modes needs two modes");
  return MultiModeSLH{{{slh.s[1][1], slh.s[1][0]}, {slh.s[0][1], slh.s[0][0]}},
                      {slh.l[1], slh.l[0]},
                      slh.h};
}

}  // namespace fockme
